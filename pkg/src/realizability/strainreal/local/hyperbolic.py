# src/realizability/strainreal/local/hyperbolic.py
"""
Semilinear hyperbolic Cauchy problem

    v_x + alpha v_y = w,   w_x + beta w_y + gamma v_y = 0,   v(0, y) = v0(y), w(0, y) = w0(y)

solved in the integral form along characteristics: column by column in x
(x is time-like), feet of characteristics from one backward RK4 step,
cubic-spline interpolation in y, trapezoid rule along each characteristic and
a Picard fixed point per column for the coupling through gamma v_y.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from loguru import logger
from scipy.interpolate import CubicSpline

from ..errors import PicardDivergenceError
from ..fields.expressions import ScalarFieldExpr
from .characteristics import rk4_step
from .coefficients import ExtendedCoefficient, LocalCoefficients


@dataclass
class LocalSolverConfig:
    picard_tol: float = 1e-10
    picard_max_iter: int = 50
    growth_limit: int = 3


@dataclass(frozen=True)
class HyperbolicSolution:
    xs: np.ndarray
    ys: np.ndarray
    v: np.ndarray
    w: np.ndarray
    c: float
    y_half: float
    picard_iterations: int
    stalled_columns: int = 0
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def h(self) -> float:
        return float(self.xs[1] - self.xs[0])

    def dependence_mask(self) -> np.ndarray:
        """True on D_c: |y| <= y_half - c x"""
        xx, yy = np.meshgrid(self.xs, self.ys, indexing="xy")
        return np.abs(yy) <= self.y_half - self.c * xx + 1e-12

    def derivatives(self) -> dict:
        """Second-order finite differences of v on the solver grid"""
        h = self.h
        v_x = np.gradient(self.v, h, axis=1, edge_order=2)
        v_y = np.gradient(self.v, h, axis=0, edge_order=2)
        return {
            "v_x": v_x,
            "v_y": v_y,
            "v_xx": np.gradient(v_x, h, axis=1, edge_order=2),
            "v_xy": np.gradient(v_x, h, axis=0, edge_order=2),
            "v_yy": np.gradient(v_y, h, axis=0, edge_order=2),
        }


def _foot(speed, x_new: float, ys: np.ndarray, h: float) -> np.ndarray:
    """Height at x_new - h of the characteristic through (x_new, ys)"""

    def rhs(t, state):
        return speed(np.full_like(state, t), state)

    return rk4_step(rhs, x_new, ys, -h)


def _interpolate(ys: np.ndarray, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    return CubicSpline(ys, values, extrapolate=True)(points)


def solve_hyperbolic_cauchy(coeffs, v0: ScalarFieldExpr, w0: ScalarFieldExpr, resolution: float,
                            x_end: Optional[float] = None, y_half: float = 1.0,
                            config: Optional[LocalSolverConfig] = None) -> HyperbolicSolution:
    """
    March the system from the data line x = 0 to x_end on a uniform grid of
    spacing `resolution`. Data are sampled on [-y_half, y_half]; values are
    certified only inside the dependence domain |y| <= y_half - c x.
    """
    config = config or LocalSolverConfig()
    extended: ExtendedCoefficient = coeffs.extended if isinstance(coeffs, LocalCoefficients) else coeffs
    c = coeffs.c if isinstance(coeffs, LocalCoefficients) else float("nan")
    h = float(resolution)
    if x_end is None:
        x_end = y_half / c if math.isfinite(c) else y_half
    half_count = math.ceil(y_half / h - 1e-9)
    ys = h * np.arange(-half_count, half_count + 1)
    steps = max(1, math.ceil(x_end / h - 1e-9))
    xs = h * np.arange(steps + 1)

    v = np.empty((ys.size, xs.size))
    w = np.empty((ys.size, xs.size))
    v[:, 0] = v0(0.0, ys)
    w[:, 0] = w0(0.0, ys)

    max_iterations = 0
    stalled = 0
    for n in range(steps):
        x_old, x_new = xs[n], xs[n + 1]
        foot_a = _foot(extended.alpha, x_new, ys, h)
        foot_b = _foot(extended.beta, x_new, ys, h)
        gamma_old = extended.gamma(np.full_like(ys, x_old), ys)
        gamma_new = extended.gamma(np.full_like(ys, x_new), ys)
        flux_old = gamma_old * np.gradient(v[:, n], h, edge_order=2)

        v_at_a = _interpolate(ys, v[:, n], foot_a)
        w_at_a = _interpolate(ys, w[:, n], foot_a)
        w_at_b = _interpolate(ys, w[:, n], foot_b)
        flux_at_b = _interpolate(ys, flux_old, foot_b)

        w_new = w_at_b - h * flux_at_b
        previous_diff = math.inf
        growth = 0
        for iteration in range(1, config.picard_max_iter + 1):
            v_new = v_at_a + 0.5 * h * (w_at_a + w_new)
            flux_new = gamma_new * np.gradient(v_new, h, edge_order=2)
            w_next = w_at_b - 0.5 * h * (flux_at_b + flux_new)
            diff = float(np.max(np.abs(w_next - w_new)))
            w_new = w_next
            if diff <= config.picard_tol:
                break
            growth = growth + 1 if diff > previous_diff else 0
            if growth >= config.growth_limit:
                raise PicardDivergenceError(
                    f"Picard iteration is not contracting at x = {x_new:.4g} "
                    f"(difference {diff:.3e} grew {growth} times in a row).\n"
                    "Shrink the working domain (smaller disk radius or tau cap)."
                )
            previous_diff = diff
        else:
            stalled += 1
            logger.warning(
                f"Picard cap of {config.picard_max_iter} iterations reached at x = {x_new:.4g}, "
                f"last difference {diff:.3e}"
            )
        max_iterations = max(max_iterations, iteration)
        v[:, n + 1] = v_at_a + 0.5 * h * (w_at_a + w_new)
        w[:, n + 1] = w_new

    logger.debug(f"hyperbolic march: {steps} columns, {ys.size} rows, max Picard iterations {max_iterations}")
    return HyperbolicSolution(xs, ys, v, w, c, float(half_count * h), max_iterations, stalled)
