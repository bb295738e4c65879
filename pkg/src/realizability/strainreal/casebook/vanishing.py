# src/realizability/strainreal/casebook/vanishing.py
"""
Strains vanishing at one point: e(U) = [[0, f(x) + g(y)], [f(x) + g(y), 0]]

With f(0) = g(0) = 0 and f, g > 0 elsewhere, a continuous positive viscosity
exists near the origin iff f and g share the leading term a x^2. Then
mu = (x^2 + y^2) / (f(x) + g(y)), closed by 1/a at the origin, gives
Div(mu e(U)) = grad(2 x y). The leading terms are estimated from dyadic
samples, so verdicts are numerical and "inconclusive" is a legal answer.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import sympy
from loguru import logger

from ..errors import InvalidInputError, QuadratureToleranceError
from ..fields.expressions import X, Y, ScalarFieldExpr, as_field, evaluate
from ..fields.grid import Grid2D, sample
from ..fields.operators import curl_div, stress_divergence
from ..fields.residuals import residual_report
from ..fields.velocity import StrainField, VelocityField

_T = sympy.Symbol("t", real=True)

REALIZABLE = "realizable"
NOT_REALIZABLE = "not realizable"
INCONCLUSIVE = "inconclusive"


@dataclass
class FitConfig:
    k_min: int = 4
    k_max: int = 12
    exponent_tolerance: float = 0.05
    coefficient_tolerance: float = 0.01
    log_residual_tolerance: float = 0.05
    positivity_samples: int = 2001
    positivity_radius: float = 1.0 / 16.0
    quadrature_tolerance: float = 1e-10


def _univariate(f: ScalarFieldExpr, name: str) -> sympy.Expr:
    """f as an expression in a neutral variable; it may be written in x or in y"""
    symbols = f.root.free_symbols
    if symbols <= {X}:
        return f.root.subs(X, _T)
    if symbols <= {Y}:
        return f.root.subs(Y, _T)
    raise InvalidInputError(f"{name} must depend on a single variable, got {f.text}")


def _values(expr: sympy.Expr, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.broadcast_to(evaluate(expr.subs(_T, X), t, np.zeros_like(t)), t.shape)


def check_admissible(expr: sympy.Expr, name: str, config: FitConfig) -> None:
    """f(0) = 0, f >= 0 on [-1, 1] and f > 0 away from a small neighborhood of 0"""
    at_zero = float(_values(expr, np.array([0.0]))[0])
    if not abs(at_zero) <= 1e-14:
        raise InvalidInputError(f"{name} must vanish at the origin, got {name}(0) = {at_zero}")
    ts = np.linspace(-1.0, 1.0, config.positivity_samples)
    ts = ts[ts != 0.0]
    values = _values(expr, ts)
    if np.any(~np.isfinite(values)) or np.any(values < 0.0):
        raise InvalidInputError(f"{name} must be non-negative on [-1, 1]")
    away = np.abs(ts) >= config.positivity_radius
    if np.any(values[away] <= 0.0):
        raise InvalidInputError(f"{name} must be positive on [-1, 1] away from the origin")


@dataclass(frozen=True)
class VanishingFamily:
    f: sympy.Expr
    g: sympy.Expr
    strain: StrainField
    velocity: Optional[VelocityField]
    method: str

    def velocity_at(self, x, y, config: Optional[FitConfig] = None) -> tuple:
        """U = 2 (int_0^y g, int_0^x f), from the antiderivative or by quadrature"""
        if self.velocity is not None:
            return self.velocity(x, y)
        config = config or FitConfig()
        return (2.0 * _integral_from_zero(self.g, y, config.quadrature_tolerance),
                2.0 * _integral_from_zero(self.f, x, config.quadrature_tolerance))

    def settle_quadrature(self, config: Optional[FitConfig] = None) -> None:
        """Raise QuadratureToleranceError when U cannot be evaluated on [-1, 1]^2 by quadrature"""
        if self.velocity is not None:
            return
        config = config or FitConfig()
        knots = np.linspace(-1.0, 1.0, 9)
        _integral_from_zero(self.f, knots, config.quadrature_tolerance)
        _integral_from_zero(self.g, knots, config.quadrature_tolerance)


def _gauss_integral(expr: sympy.Expr, upper: np.ndarray, panels: int) -> np.ndarray:
    nodes, weights = np.polynomial.legendre.leggauss(16)
    upper = np.asarray(upper, dtype=float)
    total = np.zeros(upper.shape)
    for k in range(panels):
        lo, hi = upper * k / panels, upper * (k + 1) / panels
        half = 0.5 * (hi - lo)
        for node, weight in zip(nodes, weights):
            total += weight * half * _values(expr, lo + half * (node + 1.0))
    return total


def _integral_from_zero(expr: sympy.Expr, upper, tolerance: float) -> np.ndarray:
    """Composite Gauss-Legendre (16 nodes per panel), one panel per unit length, checked by halving"""
    upper = np.asarray(upper, dtype=float)
    panels = max(1, math.ceil(float(np.max(np.abs(upper))) if upper.size else 1))
    coarse = _gauss_integral(expr, upper, panels)
    fine = _gauss_integral(expr, upper, 2 * panels)
    gap = float(np.max(np.abs(fine - coarse))) if fine.size else 0.0
    if gap > tolerance * (1.0 + float(np.max(np.abs(fine)))):
        raise QuadratureToleranceError(
            f"quadrature of the antiderivative did not settle: panel halving changed it by {gap:.3e}"
        )
    return fine


def _antiderivative(expr: sympy.Expr) -> Optional[sympy.Expr]:
    try:
        result = sympy.integrate(expr, (_T, 0, _T))
    except (NotImplementedError, ValueError, TypeError):
        return None
    if result.has(sympy.Integral) or result.has(sympy.Piecewise):
        return None
    try:
        sampled = evaluate(result.subs(_T, X), np.array([0.3, -0.7]), np.zeros(2))
    except (NameError, TypeError, AttributeError):
        return None
    return result if np.all(np.isfinite(sampled)) else None


def vanishing_family(f: ScalarFieldExpr, g: ScalarFieldExpr, check: bool = True,
                     config: Optional[FitConfig] = None, settle: bool = True) -> VanishingFamily:
    """
    Strain and velocity of the family. Without a closed-form antiderivative U
    falls back to quadrature, checked up front unless `settle` is False.
    """
    config = config or FitConfig()
    f_t, g_t = _univariate(f, "f"), _univariate(g, "g")
    if check:
        check_admissible(f_t, "f", config)
        check_admissible(g_t, "g", config)
    shear = as_field(f_t.subs(_T, X) + g_t.subs(_T, Y))
    strain = StrainField(as_field(0), shear)

    big_f, big_g = _antiderivative(f_t), _antiderivative(g_t)
    if big_f is None or big_g is None:
        logger.info("no closed-form antiderivative; U is evaluated by Gauss-Legendre quadrature")
        family = VanishingFamily(f_t, g_t, strain, None, "quadrature")
        if settle:
            family.settle_quadrature(config)
        return family
    ux = as_field(2 * big_g.subs(_T, Y))
    uy = as_field(2 * big_f.subs(_T, X))
    return VanishingFamily(f_t, g_t, strain, VelocityField(ux, uy), "symbolic")


@dataclass(frozen=True)
class LeadingTerm:
    exponent: Optional[float]
    coefficient: Optional[float]
    log_residual: Optional[float]
    status: str

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def fit_leading_term(expr: sympy.Expr, config: FitConfig) -> LeadingTerm:
    """
    Least squares of log f(+-r) against log r over r = 2^-k, k = k_min..k_max.
    The coefficient is f(r) / r^m at the smallest radius with m the rounded
    exponent when that lies within tolerance, else exp(intercept).
    """
    radii = 2.0 ** -np.arange(config.k_min, config.k_max + 1, dtype=float)
    samples = np.concatenate([_values(expr, radii), _values(expr, -radii)])
    logr = np.concatenate([np.log(radii), np.log(radii)])
    if np.any(~np.isfinite(samples)) or np.any(samples <= 0.0):
        return LeadingTerm(None, None, None, "flat or not positive at the dyadic radii")
    logv = np.log(samples)
    slope, intercept = np.polyfit(logr, logv, 1)
    residual = float(np.max(np.abs(logv - (slope * logr + intercept))))
    if residual > config.log_residual_tolerance:
        return LeadingTerm(float(slope), None, residual, "no power law near the origin")
    rounded = round(slope)
    if abs(slope - rounded) <= config.exponent_tolerance:
        r = radii[-1]
        coefficient = 0.5 * float(_values(expr, np.array([r]))[0] + _values(expr, np.array([-r]))[0]) / r**rounded
    else:
        coefficient = float(math.exp(intercept))
    return LeadingTerm(float(slope), coefficient, residual, "ok")


@dataclass(frozen=True)
class VanishingVerdict:
    verdict: str
    f_term: LeadingTerm
    g_term: LeadingTerm
    reason: str
    mu: Optional[ScalarFieldExpr] = None
    limit: Optional[float] = None
    residual: Optional[float] = None
    divergence_defect: Optional[float] = None
    discontinuous_realizable: Optional[bool] = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def realizable(self) -> Optional[bool]:
        return None if self.verdict == INCONCLUSIVE else self.verdict == REALIZABLE

    def viscosity(self, x, y) -> np.ndarray:
        """mu with the value 1/a at the origin"""
        if self.mu is None:
            raise InvalidInputError(f"no viscosity for a {self.verdict} instance")
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        values = np.array(np.broadcast_to(self.mu(x, y), x.shape), dtype=float)
        values[(x == 0.0) & (y == 0.0)] = self.limit
        return values

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "realizable": self.realizable,
            "numerical": True,
            "reason": self.reason,
            "exponents": {"f": self.f_term.exponent, "g": self.g_term.exponent},
            "coefficients": {"f": self.f_term.coefficient, "g": self.g_term.coefficient},
            "mu_at_origin": self.limit,
            "residual": self.residual,
            "divergence_defect": self.divergence_defect,
            "realizable_with_discontinuous_mu": self.discontinuous_realizable,
        }


def _decide(f_term: LeadingTerm, g_term: LeadingTerm, config: FitConfig) -> tuple:
    if not (f_term.ok and g_term.ok):
        bad = f_term if not f_term.ok else g_term
        return INCONCLUSIVE, f"the leading-order condition is not numerically decidable: {bad.status}"
    exponents_two = all(abs(t.exponent - 2.0) <= config.exponent_tolerance for t in (f_term, g_term))
    if not exponents_two:
        return NOT_REALIZABLE, (
            f"continuous realizability needs f, g ~ a x^2; fitted exponents {f_term.exponent:.3f}, "
            f"{g_term.exponent:.3f}"
        )
    a_f, a_g = f_term.coefficient, g_term.coefficient
    if abs(a_f - a_g) > config.coefficient_tolerance * max(a_f, a_g):
        return NOT_REALIZABLE, (
            f"continuous realizability needs equal leading coefficients; fitted {a_f:.6g} and {a_g:.6g}"
        )
    return REALIZABLE, f"f, g ~ {0.5 * (a_f + a_g):.6g} x^2 at the origin"


def _discontinuous(f_term: LeadingTerm, g_term: LeadingTerm, config: FitConfig) -> Optional[bool]:
    """Same even leading exponent with any positive coefficients"""
    if not (f_term.ok and g_term.ok):
        return None
    m_f, m_g = round(f_term.exponent), round(g_term.exponent)
    within = all(abs(t.exponent - round(t.exponent)) <= config.exponent_tolerance for t in (f_term, g_term))
    return bool(within and m_f == m_g and m_f % 2 == 0 and m_f > 0)


def ray_limits(verdict: VanishingVerdict, radius: float = 1e-3, rays: int = 8) -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(rays) / rays
    return verdict.viscosity(radius * np.cos(angles), radius * np.sin(angles))


def vanishing_viscosity(f: ScalarFieldExpr, g: ScalarFieldExpr, grid: Optional[Grid2D] = None,
                        config: Optional[FitConfig] = None) -> VanishingVerdict:
    """
    Verdict on continuous realizability near the origin, and for realizable
    instances mu = (x^2 + y^2) / (f + g) with its checks on [-1, 1]^2.
    """
    config = config or FitConfig()
    family = vanishing_family(f, g, config=config, settle=False)
    f_term = fit_leading_term(family.f, config)
    g_term = fit_leading_term(family.g, config)
    verdict, reason = _decide(f_term, g_term, config)
    discontinuous = _discontinuous(f_term, g_term, config)
    logger.info(f"vanishing strain: {verdict} ({reason})")
    if verdict != REALIZABLE:
        return VanishingVerdict(verdict, f_term, g_term, reason, discontinuous_realizable=discontinuous,
                                diagnostics={"velocity": family.method})
    family.settle_quadrature(config)

    grid = grid or Grid2D.square((0.0, 0.0), 1.0, 41)
    shear = family.strain.e12
    mu = as_field(sympy.cancel((X**2 + Y**2) / shear.root))
    limit = 2.0 / (f_term.coefficient + g_term.coefficient)
    xx, yy = grid.mesh()
    off_origin = np.hypot(xx, yy) > 1e-12

    residual = residual_report(sample(curl_div(mu, family.strain), grid), grid, mask=off_origin,
                               label="curl_div_symbolic")
    div_x, div_y = stress_divergence(mu, family.strain)
    defect = max(
        residual_report(sample(div_x, grid) - 2.0 * yy, grid, mask=off_origin).max_abs,
        residual_report(sample(div_y, grid) - 2.0 * xx, grid, mask=off_origin).max_abs,
    )
    result = VanishingVerdict(verdict, f_term, g_term, reason, mu, limit, residual.max_abs, defect, discontinuous)
    values = result.viscosity(xx, yy)
    if np.any(~(values > 0.0)):
        raise InvalidInputError("the constructed viscosity is not positive on the grid")
    return result
