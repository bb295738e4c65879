# src/realizability/strainreal/casebook/counterexample.py
"""
The periodic strain e(U_eps) = [[1, eps sin(2 pi y)], [eps sin(2 pi y), -1]]

U_eps = (x - (eps / pi) cos(2 pi y), -y) has stream function
-x y + eps sin(2 pi y) / (2 pi^2). No positive viscosity that is 1-periodic in
x realizes it: the x-momentum balance over (0, 1) x (-r, r) leaves the boundary
flux eps sin(2 pi r) int_0^1 [mu(x, r) + mu(x, -r)] dx, which is positive.
"""

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import sympy
from loguru import logger

from ..errors import InvalidInputError
from ..fields.expressions import X, Y, ScalarFieldExpr, as_field
from ..fields.grid import Grid2D, sample
from ..fields.operators import curl_div, fd_curl_div
from ..fields.residuals import realization_residual, residual_report
from ..fields.velocity import StrainField, VelocityField, stream_to_velocity, strain_of
from ..wave.coefficients import wave_operator, wave_operator_terms

GAUSS_NODES = 16
AUDIT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CounterexampleInstance:
    epsilon: float
    velocity: VelocityField
    strain: StrainField

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "stream": self.velocity.stream.text,
            "e11": self.strain.e11.text,
            "e12": self.strain.e12.text,
        }


def _epsilon(epsilon: float) -> sympy.Expr:
    if not epsilon > 0:
        raise InvalidInputError(f"the counterexample needs eps > 0, got {epsilon}")
    return sympy.nsimplify(epsilon)


def counterexample_velocity(epsilon: float) -> VelocityField:
    eps = _epsilon(epsilon)
    stream = as_field(-X * Y + eps * sympy.sin(2 * sympy.pi * Y) / (2 * sympy.pi**2))
    return stream_to_velocity(stream).with_average((1.0, 0.0, 0.0, -1.0))


def counterexample(epsilon: float) -> CounterexampleInstance:
    U = counterexample_velocity(epsilon)
    return CounterexampleInstance(float(epsilon), U, strain_of(U))


def _gauss_unit(samples: int = GAUSS_NODES) -> tuple:
    nodes, weights = np.polynomial.legendre.leggauss(samples)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def torus_obstruction(mu: Union[ScalarFieldExpr, Callable], epsilon: float, r: float) -> float:
    """
    int_0^1 [(mu e)(x, r) - (mu e)(x, -r)] : (e_x (x) e_y) dx by Gauss-Legendre,
    which equals eps sin(2 pi r) int_0^1 [mu(x, r) + mu(x, -r)] dx. A positive
    value rules out mu (with any x-periodic pressure) as a torus realization.
    """
    if not 0.0 < r < 0.5:
        raise InvalidInputError(f"the obstruction strip needs 0 < r < 1/2, got r = {r}")
    strain = counterexample(epsilon).strain
    xs, weights = _gauss_unit()
    top = np.full_like(xs, r)
    mu_top = np.broadcast_to(mu(xs, top), xs.shape)
    mu_bottom = np.broadcast_to(mu(xs, -top), xs.shape)
    if np.any(mu_top <= 0) or np.any(mu_bottom <= 0):
        raise InvalidInputError("the obstruction integral needs a positive viscosity")
    shear_top = np.broadcast_to(strain.e12(xs, top), xs.shape)
    shear_bottom = np.broadcast_to(strain.e12(xs, -top), xs.shape)
    value = float(np.sum(weights * (mu_top * shear_top - mu_bottom * shear_bottom)))
    logger.debug(f"torus obstruction eps={epsilon}, r={r}: {value:.6g}")
    return value


def printed_equation(u: ScalarFieldExpr, epsilon: float) -> ScalarFieldExpr:
    """
    Right minus left side of the expanded U_eps wave equation whose lower-order
    terms read + 4 pi eps cos(2 pi y) u_y - 4 pi^2 eps sin(2 pi y).
    """
    eps = _epsilon(epsilon)
    s = as_field(eps * sympy.sin(2 * sympy.pi * Y))
    c = as_field(4 * sympy.pi * eps * sympy.cos(2 * sympy.pi * Y))
    u_x, u_y = u.diff("x"), u.diff("y")
    left = 2 * u_x.diff("y") - s * u.diff("x", 2) + s * u.diff("y", 2)
    right = -2 * u_x * u_y + s * u_x * u_x - s * u_y * u_y + c * u_y - 4 * sympy.pi**2 * s
    return right - left


def printed_wave_residual(u: ScalarFieldExpr, epsilon: float, grid: Grid2D) -> tuple:
    """(printed-equation residual, general-equation residual) for U_eps, side by side"""
    U = counterexample_velocity(epsilon)
    printed = residual_report(sample(printed_equation(u, epsilon), grid), grid, label="printed_equation")
    general = residual_report(sample(wave_operator(u, U), grid), grid, label="general_equation")
    return printed, general


def sign_convention_audit(epsilon: float, grid: Grid2D) -> dict:
    """
    Compare, for U_eps, the printed wave equation, the general operator
    e^{-u} curl[Div(e^u e(U))] and the direct curl-div of mu = e^{2 pi x}.
    """
    U = counterexample_velocity(epsilon)
    strain = strain_of(U)
    zero = as_field(0)
    linear = as_field(2 * sympy.pi * X)
    trial = as_field(sympy.sin(X) * sympy.cos(2 * Y) + X**2 * Y / 3)

    cases = {}
    for name, u in (("u=0", zero), ("u=2pi x", linear)):
        printed, general = printed_wave_residual(u, epsilon, grid)
        cases[name] = {"printed": printed.max_abs, "general": general.max_abs}

    # printed = principal + quadratic + drift - source, general = ... - drift + source
    terms = wave_operator_terms(trial, U)
    flipped = terms["principal"] + terms["quadratic"] + terms["drift"] - terms["source"]
    lower_order_negated = sympy.simplify(sympy.expand(printed_equation(trial, epsilon).root - flipped.root)) == 0

    mu = as_field(sympy.exp(2 * sympy.pi * X))
    exact_identity = sympy.simplify(
        sympy.exp(-2 * sympy.pi * X) * curl_div(mu, strain).root - wave_operator(linear, U).root
    ) == 0
    direct = realization_residual(mu, U, grid, margin=2)
    xx, _ = grid.mesh()
    scale = float(np.max(np.exp(2.0 * np.pi * xx)))

    verdict = {
        "printed_admits_u_2pi_x": cases["u=2pi x"]["printed"] <= AUDIT_TOLERANCE,
        "general_admits_u_2pi_x": cases["u=2pi x"]["general"] <= AUDIT_TOLERANCE,
        "exp_2pi_x_realizes": direct.max_abs <= AUDIT_TOLERANCE * scale,
        "printed_is_general_with_lower_order_terms_negated": bool(lower_order_negated),
        "general_matches_direct_curl_div": bool(exact_identity),
    }
    if verdict["printed_admits_u_2pi_x"] and not verdict["general_admits_u_2pi_x"]:
        logger.warning(
            "sign-convention mismatch: u = 2 pi x solves the printed equation but not "
            "e^{-u} curl[Div(e^u e(U))] = 0 with R_perp = [[0, -1], [1, 0]] and curl U = d_x Uy - d_y Ux"
        )
    return {
        "epsilon": float(epsilon),
        "conventions": {"R_perp": [[0, -1], [1, 0]], "curl": "d_x Uy - d_y Ux"},
        "residuals": cases,
        "direct_curl_div": direct.to_dict(),
        "direct_fd_vs_symbolic": _fd_gap(mu, strain, grid),
        "verdict": verdict,
    }


def _fd_gap(mu: ScalarFieldExpr, strain: StrainField, grid: Grid2D) -> float:
    """Sup over the interior of |finite-difference curl-div - symbolic curl-div|"""
    fd = fd_curl_div(sample(mu, grid), sample(strain.e11, grid), sample(strain.e12, grid), grid)
    exact = sample(curl_div(mu, strain), grid)
    return residual_report(fd - exact, grid, margin=2).max_abs
