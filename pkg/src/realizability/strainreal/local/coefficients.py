# src/realizability/strainreal/local/coefficients.py
"""
Coefficients of the first-order hyperbolic system behind local realizability

    a = 2 u_xy / (u_xx - u_yy),  alpha = a - sqrt(a^2 + 1),  beta = a + sqrt(a^2 + 1),
    gamma = -d_x alpha - beta d_y alpha

Outside the working disk of radius rho the coefficient a is blended into its
center value a(0) with a quintic transition on [rho, 2 rho]. The blended
coefficient is what the characteristic solvers integrate.
"""

import math
from dataclasses import dataclass

import numpy as np
import sympy
from loguru import logger

from ..errors import DenominatorSignError
from ..fields.expressions import ScalarFieldExpr, as_field

SAFETY_MARGIN = 1.1
SAMPLES_PER_AXIS = 201


def _blend(r: np.ndarray, rho: float) -> tuple:
    """chi(r) and chi'(r): 1 inside rho, 0 beyond 2 rho, smoothstep between"""
    s = np.clip((r - rho) / rho, 0.0, 1.0)
    chi = 1.0 - (6.0 * s**5 - 15.0 * s**4 + 10.0 * s**3)
    dchi = -(30.0 * s**2 * (1.0 - s) ** 2) / rho
    return chi, dchi


@dataclass(frozen=True)
class ExtendedCoefficient:
    """Numerical evaluator of the blended a and derivatives; `reflected` gives -a(-x, y)"""

    a: ScalarFieldExpr
    a_x: ScalarFieldExpr
    a_y: ScalarFieldExpr
    a0: float
    rho: float
    reflected: bool = False

    def mirror(self) -> "ExtendedCoefficient":
        return ExtendedCoefficient(self.a, self.a_x, self.a_y, self.a0, self.rho, not self.reflected)

    def values(self, x, y) -> tuple:
        """(a, a_x, a_y) of the blended coefficient at broadcast points"""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        xs = -x if self.reflected else x
        r = np.hypot(xs, y)
        chi, dchi = _blend(r, self.rho)
        a = np.full(x.shape, self.a0)
        ax = np.zeros(x.shape)
        ay = np.zeros(x.shape)
        inside = r < 2.0 * self.rho
        if np.any(inside):
            xi, yi, ri = xs[inside], y[inside], r[inside]
            raw = self.a(xi, yi)
            rx = self.a_x(xi, yi)
            ry = self.a_y(xi, yi)
            c = chi[inside]
            dc = dchi[inside]
            safe_r = np.where(ri > 0.0, ri, 1.0)
            a[inside] = c * raw + (1.0 - c) * self.a0
            ax[inside] = c * rx + (raw - self.a0) * dc * xi / safe_r
            ay[inside] = c * ry + (raw - self.a0) * dc * yi / safe_r
        if self.reflected:
            return -a, ax, -ay
        return a, ax, ay

    def alpha(self, x, y) -> np.ndarray:
        a, _, _ = self.values(x, y)
        return a - np.sqrt(a * a + 1.0)

    def beta(self, x, y) -> np.ndarray:
        a, _, _ = self.values(x, y)
        return a + np.sqrt(a * a + 1.0)

    def alpha_y(self, x, y) -> np.ndarray:
        a, _, ay = self.values(x, y)
        root = np.sqrt(a * a + 1.0)
        return -(a - root) / root * ay

    def gamma(self, x, y) -> np.ndarray:
        a, ax, ay = self.values(x, y)
        root = np.sqrt(a * a + 1.0)
        alpha = a - root
        beta = a + root
        return alpha / root * (ax + beta * ay)


@dataclass(frozen=True)
class LocalCoefficients:
    a: ScalarFieldExpr
    alpha: ScalarFieldExpr
    beta: ScalarFieldExpr
    gamma: ScalarFieldExpr
    c: float
    radius: float
    extended: ExtendedCoefficient
    orientation_record: object = None

    def is_hyperbolic_gap(self, x, y) -> np.ndarray:
        """beta - alpha = 2 sqrt(a^2 + 1) on the blended coefficient"""
        a, _, _ = self.extended.values(x, y)
        return 2.0 * np.sqrt(a * a + 1.0)


def _disk_samples(radius: float) -> tuple:
    axis = np.linspace(-radius, radius, SAMPLES_PER_AXIS)
    xx, yy = np.meshgrid(axis, axis, indexing="xy")
    inside = np.hypot(xx, yy) <= radius
    return xx[inside], yy[inside]


def local_coefficients(u_working: ScalarFieldExpr, radius: float, orientation_record=None) -> LocalCoefficients:
    """
    Symbolic a, alpha, beta, gamma of a normalised stream function plus the bound
    c >= sup(|alpha| + |beta|) with a 10% margin, sampled over D(0, 2 radius).
    """
    if radius <= 0:
        raise ValueError(f"disk radius must be positive, got {radius}")
    d_expr = u_working.diff("x", 2) - u_working.diff("y", 2)
    q_expr = u_working.diff("x").diff("y")

    xs, ys = _disk_samples(2.0 * radius)
    d_values = d_expr(xs, ys)
    bad = ~(d_values > 0.0)
    if np.any(bad):
        r_bad = float(np.min(np.hypot(xs[bad], ys[bad])))
        advised = 0.9 * r_bad / 2.0
        raise DenominatorSignError(
            "local realizability needs u_xx - u_yy > 0 on the working disk; it changes sign at "
            f"distance {r_bad:.4g} from the center.\nShrink the disk radius to at most {advised:.4g}.",
            advised,
        )

    a = 2 * q_expr / d_expr
    root = as_field(sympy.sqrt(a.root**2 + 1))
    alpha = a - root
    beta = a + root
    gamma = -alpha.diff("x") - beta * alpha.diff("y")

    a0 = float(a(0.0, 0.0))
    extended = ExtendedCoefficient(a, a.diff("x"), a.diff("y"), a0, float(radius))
    blended, _, _ = extended.values(xs, ys)
    c = SAFETY_MARGIN * float(np.max(2.0 * np.sqrt(blended**2 + 1.0)))
    logger.debug(f"local coefficients: a(0) = {a0:.6g}, c = {c:.6g}")
    if not math.isfinite(c):
        raise DenominatorSignError("coefficient a is not finite on the working disk", radius / 2.0)
    return LocalCoefficients(a, alpha, beta, gamma, c, float(radius), extended, orientation_record)
