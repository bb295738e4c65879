# src/realizability/strainreal/local/characteristics.py
"""
Characteristic curves dY/dt = alpha(t, Y), Y(x; x, y) = y

Integrated with classical RK4 together with the log-sensitivity
L = log d_y Y, whose derivative along the curve is d_y alpha.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..fields.expressions import ScalarFieldExpr

SENSITIVITY_DELTA = 1e-5


def rk4_step(rhs: Callable, t: float, state: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(t, state)
    k2 = rhs(t + dt / 2.0, state + dt / 2.0 * k1)
    k3 = rhs(t + dt / 2.0, state + dt / 2.0 * k2)
    k4 = rhs(t + dt, state + dt * k3)
    return state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _speed_callables(speed) -> tuple:
    """(speed, d_y speed) as numpy callables from an expression or a coefficient evaluator"""
    if isinstance(speed, ScalarFieldExpr):
        return speed, speed.diff("y")
    if hasattr(speed, "alpha") and hasattr(speed, "alpha_y"):
        return speed.alpha, speed.alpha_y
    raise TypeError(f"unsupported speed field {type(speed).__name__}")


@dataclass(frozen=True)
class CharacteristicPath:
    start: tuple
    ts: np.ndarray
    ys: np.ndarray
    dy_formula: np.ndarray
    dy_numeric: np.ndarray
    dx_formula: np.ndarray
    truncated: bool

    @property
    def step(self) -> float:
        return float(self.ts[1] - self.ts[0]) if len(self.ts) > 1 else 0.0

    def sensitivity_mismatch(self) -> float:
        return float(np.max(np.abs(self.dy_formula - self.dy_numeric)))


def _integrate(speed, speed_y, t0: float, y0: np.ndarray, dt: float, steps: int,
               y_bounds: Optional[tuple]) -> tuple:
    """March the states (Y, L) for a batch of starting heights; stops early when leaving y_bounds"""

    def rhs(t, state):
        ys, _ = state
        tt = np.full_like(ys, t)
        return np.array([speed(tt, ys), speed_y(tt, ys)])

    state = np.array([np.asarray(y0, dtype=float), np.zeros_like(y0, dtype=float)])
    history = [state]
    truncated = False
    for n in range(steps):
        state = rk4_step(rhs, t0 + n * dt, state, dt)
        if y_bounds is not None and np.any((state[0] < y_bounds[0]) | (state[0] > y_bounds[1])):
            truncated = True
            break
        history.append(state)
    return np.array(history), truncated


def trace_characteristic(speed, anchor: tuple, t_end: float, step: float,
                         y_bounds: Optional[tuple] = None) -> CharacteristicPath:
    """
    Integrate the characteristic through `anchor` = (x, y) from t = x to t_end.

    Alongside Y the path carries d_y Y from the exponential formula
    exp(int_x^t d_y alpha), the same derivative by central differences of
    neighbouring paths, and d_x Y = -alpha(x, y) d_y Y.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    f, f_y = _speed_callables(speed)
    x_anchor, y_anchor = float(anchor[0]), float(anchor[1])
    span = t_end - x_anchor
    steps = max(1, math.ceil(abs(span) / step - 1e-9)) if span != 0 else 0
    dt = span / steps if steps else 0.0

    starts = np.array([y_anchor, y_anchor + SENSITIVITY_DELTA, y_anchor - SENSITIVITY_DELTA])
    history, truncated = _integrate(f, f_y, x_anchor, starts, dt, steps, y_bounds)
    count = history.shape[0]
    ts = x_anchor + dt * np.arange(count)
    ys = history[:, 0, 0]
    dy_formula = np.exp(history[:, 1, 0])
    dy_numeric = (history[:, 0, 1] - history[:, 0, 2]) / (2.0 * SENSITIVITY_DELTA)
    speed_at_anchor = float(np.asarray(f(np.array([x_anchor]), np.array([y_anchor])))[0])
    dx_formula = -speed_at_anchor * dy_formula
    return CharacteristicPath((x_anchor, y_anchor), ts, ys, dy_formula, dy_numeric, dx_formula, truncated)
