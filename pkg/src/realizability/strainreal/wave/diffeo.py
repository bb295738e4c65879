# src/realizability/strainreal/wave/diffeo.py
"""
Characteristic change of variables

R(x, xi) and S(x, eta) solve d_x R = alpha(x, R), d_x S = beta(x, S) with
R(0, xi) = xi, S(0, eta) = eta. The inverse maps satisfy
y = R(x, xi(x, y)) = S(x, eta(x, y)) and the canonical variables are
t = (xi - eta) / 2, z = (xi + eta) / 2.

Flows are integrated with RK4 together with the anchor sensitivities
R_xi and R_xixi. Every point uses its own step count ceil(|x| / step), so
a value never depends on which other points are evaluated with it.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from loguru import logger

from ..errors import CharacteristicInversionError
from ..fields.grid import Grid2D
from .coefficients import WaveCoefficients


@dataclass
class DiffeoConfig:
    step: float = 0.01
    newton_iterations: int = 4
    tolerance: float = 1e-11
    max_enlargements: int = 3
    roundtrip_tolerance: float = 1e-8
    check_samples: int = 21


@dataclass(frozen=True)
class _Family:
    """Speed field of one characteristic family with the derivatives the flow needs"""

    speed: object
    speed_x: object
    speed_y: object
    speed_yy: object

    @classmethod
    def of(cls, expr) -> "_Family":
        return cls(expr, expr.diff("x"), expr.diff("y"), expr.diff("y", 2))


def _rk4_batch(rhs, t: np.ndarray, state: np.ndarray, dt: np.ndarray) -> np.ndarray:
    k1 = rhs(t, state)
    k2 = rhs(t + dt / 2.0, state + dt / 2.0 * k1)
    k3 = rhs(t + dt / 2.0, state + dt / 2.0 * k2)
    k4 = rhs(t + dt, state + dt * k3)
    return state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass
class CharacteristicDiffeo:
    coefficients: WaveCoefficients
    config: DiffeoConfig = field(default_factory=DiffeoConfig)
    half_width: float = 0.0
    roundtrip_error: float = float("nan")
    jacobian_min: float = float("nan")
    jacobian_sign: float = float("nan")

    def __post_init__(self):
        self._families = {
            "alpha": _Family.of(self.coefficients.alpha),
            "beta": _Family.of(self.coefficients.beta),
        }

    def _march(self, family: str, t0: np.ndarray, t1: np.ndarray, y0: np.ndarray,
               sensitivities: bool = True) -> tuple:
        fam = self._families[family]
        t0, t1, y0 = (np.asarray(v, dtype=float).ravel() for v in np.broadcast_arrays(t0, t1, y0))
        steps = np.ceil(np.abs(t1 - t0) / self.config.step - 1e-12).astype(int)
        dt = np.where(steps > 0, (t1 - t0) / np.maximum(steps, 1), 0.0)
        state = np.stack([y0, np.ones_like(y0), np.zeros_like(y0)])

        def rhs(t, s):
            y, r1, r2 = s
            a_y = fam.speed_y(t, y)
            return np.stack([fam.speed(t, y), a_y * r1, fam.speed_yy(t, y) * r1 * r1 + a_y * r2])

        def rhs_plain(t, s):
            return np.stack([fam.speed(t, s[0]), np.zeros_like(s[0]), np.zeros_like(s[0])])

        for k in range(int(steps.max(initial=0))):
            active = k < steps
            t = t0[active] + k * dt[active]
            state[:, active] = _rk4_batch(rhs if sensitivities else rhs_plain, t,
                                          state[:, active], dt[active])
        return state[0], state[1], state[2]

    def flow(self, family: str, x, anchor) -> tuple:
        """(R, R_anchor, R_anchor_anchor) at (x, anchor)"""
        x, anchor = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(anchor, dtype=float))
        y, d1, d2 = self._march(family, np.zeros(x.size), x.ravel(), anchor.ravel())
        return y.reshape(x.shape), d1.reshape(x.shape), d2.reshape(x.shape)

    def invert(self, family: str, x, y) -> np.ndarray:
        """Anchor of the characteristic through (x, y): a monotone root solve in the anchor"""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        shape = x.shape
        x, y = x.ravel(), y.ravel()
        guess, _, _ = self._march(family, x, np.zeros_like(x), y, sensitivities=False)
        anchor = guess.copy()
        for _ in range(self.config.newton_iterations):
            r, r1, _ = self.flow(family, x, anchor)
            if np.any(r1 <= 0.0):
                raise CharacteristicInversionError(
                    f"the {family} characteristic flow is not monotone in its anchor (d R / d anchor <= 0)"
                )
            anchor = anchor - (r - y) / r1
        r, _, _ = self.flow(family, x, anchor)
        bad = np.abs(r - y) > self.config.tolerance * (1.0 + np.abs(y))
        if np.any(bad):
            anchor[bad] = self._bracket(family, x[bad], y[bad], guess[bad])
        return anchor.reshape(shape)

    def _bracket(self, family: str, x: np.ndarray, y: np.ndarray, guess: np.ndarray) -> np.ndarray:
        """Bisection on an anchor lattice around the guess, enlarged up to max_enlargements times"""
        width = np.maximum(np.abs(x), 1.0) * self.config.step * 16
        for enlargement in range(self.config.max_enlargements + 1):
            lo, hi = guess - width, guess + width
            f_lo = self.flow(family, x, lo)[0] - y
            f_hi = self.flow(family, x, hi)[0] - y
            if np.all(f_lo * f_hi <= 0.0):
                break
            logger.debug(f"{family} inversion: enlarging anchor lattice (round {enlargement + 1})")
            width = width * 4.0
        else:
            raise CharacteristicInversionError(
                f"could not bracket the {family} anchor for {int(np.sum(f_lo * f_hi > 0))} points"
            )
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            f_mid = self.flow(family, x, mid)[0] - y
            left = f_lo * f_mid <= 0.0
            hi = np.where(left, mid, hi)
            lo = np.where(left, lo, mid)
            f_lo = np.where(left, f_lo, f_mid)
            if np.max(hi - lo) < 1e-14:
                break
        return 0.5 * (lo + hi)

    def xi(self, x, y) -> np.ndarray:
        return self.invert("alpha", x, y)

    def eta(self, x, y) -> np.ndarray:
        return self.invert("beta", x, y)

    def canonical(self, x, y) -> tuple:
        xi, eta = self.xi(x, y), self.eta(x, y)
        return 0.5 * (xi - eta), 0.5 * (xi + eta)

    def anchor_derivatives(self, family: str, x, y, anchor: Optional[np.ndarray] = None) -> dict:
        """First and second derivatives of xi (or eta) in x and y"""
        fam = self._families[family]
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        if anchor is None:
            anchor = self.invert(family, x, y)
        _, r1, r2 = self.flow(family, x, anchor)
        speed = fam.speed(x, y)
        d_y = 1.0 / r1
        d_x = -speed * d_y
        d_yy = -r2 * d_y**3
        d_xy = -fam.speed_y(x, y) * d_y - speed * d_yy
        d_xx = -fam.speed_x(x, y) * d_y - speed * d_xy
        return {"value": anchor, "x": d_x, "y": d_y, "xx": d_xx, "xy": d_xy, "yy": d_yy, "R_anchor": r1}

    def jacobian(self, x, y) -> np.ndarray:
        """J = (beta - alpha) xi_y eta_y"""
        dxi = self.anchor_derivatives("alpha", x, y)
        deta = self.anchor_derivatives("beta", x, y)
        gap = self._families["beta"].speed(x, y) - self._families["alpha"].speed(x, y)
        return gap * dxi["y"] * deta["y"]

    def pull_back(self, t, z) -> tuple:
        """
        (x, y) with xi(x, y) = z + t and eta(x, y) = z - t, found where
        D(x) = R(x, xi) - S(x, eta) vanishes. D(0) = 2t and D is monotone in the
        direction sign(t) sign(a). R and S sit at different heights, so the
        root is not bounded by |t| once a varies; the march stops at the sign
        change or at `reach`.
        """
        t, z = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(z, dtype=float))
        shape = t.shape
        t, z = t.ravel(), z.ravel()
        xi, eta = z + t, z - t
        direction = np.sign(t) * self.coefficients.sign_a
        step = self.config.step
        reach = 4.0 * max(self.half_width, float(np.max(np.abs(t), initial=0.0))) + 2.0 * step

        # march both families on the lattice x = k step until D changes sign
        x_lo = np.zeros_like(t)
        r, s = xi.copy(), eta.copy()
        d_lo = r - s
        slope_lo = self._slope(x_lo, r, s)
        x_hi, d_hi, slope_hi = x_lo.copy(), d_lo.copy(), slope_lo.copy()
        open_ = np.abs(t) > 0.0
        fam_a, fam_b = self._families["alpha"], self._families["beta"]
        k = 0
        while np.any(open_):
            idx = np.flatnonzero(open_)
            dt = direction[idx] * step
            x0 = k * dt
            state = np.stack([r[idx], s[idx]])

            def rhs(tt, st):
                return np.stack([fam_a.speed(tt, st[0]), fam_b.speed(tt, st[1])])

            state = _rk4_batch(rhs, x0, state, dt)
            x1 = (k + 1) * dt
            d1 = state[0] - state[1]
            crossed = np.sign(d1) != np.sign(d_lo[idx])
            done = crossed | (d1 == 0.0)
            hit = idx[done]
            x_hi[hit] = x1[done]
            d_hi[hit] = d1[done]
            slope_hi[hit] = self._slope(x1[done], state[0][done], state[1][done])
            go = idx[~done]
            x_lo[go] = x1[~done]
            d_lo[go] = d1[~done]
            slope_lo[go] = self._slope(x1[~done], state[0][~done], state[1][~done])
            r[idx], s[idx] = state[0], state[1]
            open_[hit] = False
            k += 1
            if np.any(open_) and k * step > reach:
                raise CharacteristicInversionError(
                    f"characteristics failed to intersect within |x| <= {reach:.3g} "
                    f"for {int(np.sum(open_))} points; |a| is too small"
                )

        x = np.where(np.abs(t) > 0.0, self._hermite_root(x_lo, x_hi, d_lo, d_hi, slope_lo, slope_hi), 0.0)
        for _ in range(3):
            r_x = self.flow("alpha", x, xi)[0]
            s_x = self.flow("beta", x, eta)[0]
            x = x - np.where(np.abs(t) > 0.0, (r_x - s_x) / self._slope(x, r_x, s_x), 0.0)
        y = self.flow("alpha", x, xi)[0]
        return x.reshape(shape), y.reshape(shape)

    def _slope(self, x, r, s) -> np.ndarray:
        return self._families["alpha"].speed(x, r) - self._families["beta"].speed(x, s)

    @staticmethod
    def _hermite_root(x0, x1, d0, d1, s0, s1) -> np.ndarray:
        """Root of the cubic Hermite interpolant of D on [x0, x1] by safeguarded Newton"""
        width = x1 - x0
        safe = np.where(width == 0.0, 1.0, width)
        m0, m1 = s0 * width, s1 * width
        with np.errstate(all="ignore"):
            u = np.clip(np.where(d1 != d0, d0 / (d0 - d1), 0.0), 0.0, 1.0)
        for _ in range(8):
            h00 = 2 * u**3 - 3 * u**2 + 1
            h10 = u**3 - 2 * u**2 + u
            h01 = -2 * u**3 + 3 * u**2
            h11 = u**3 - u**2
            value = h00 * d0 + h10 * m0 + h01 * d1 + h11 * m1
            deriv = (6 * u**2 - 6 * u) * d0 + (3 * u**2 - 4 * u + 1) * m0 + (-6 * u**2 + 6 * u) * d1 + (3 * u**2 - 2 * u) * m1
            with np.errstate(all="ignore"):
                u = np.clip(u - np.where(deriv != 0.0, value / deriv, 0.0), 0.0, 1.0)
        return np.where(width == 0.0, x0, x0 + u * safe)


def build_diffeomorphism(coeffs: WaveCoefficients, half_width: float,
                         config: Optional[DiffeoConfig] = None) -> CharacteristicDiffeo:
    """
    Set up the characteristic maps and certify them on the box [-half_width, half_width]^2:
    round trip y = R(x, xi(x, y)) = S(x, eta(x, y)), xi(0, 0) = eta(0, 0) = 0 and a
    Jacobian of constant sign.
    """
    config = config or DiffeoConfig()
    diffeo = CharacteristicDiffeo(coeffs, config, half_width=half_width)
    grid = Grid2D.square((0.0, 0.0), half_width, config.check_samples)
    xx, yy = grid.mesh()
    xi = diffeo.xi(xx, yy)
    eta = diffeo.eta(xx, yy)
    roundtrip = max(
        float(np.max(np.abs(diffeo.flow("alpha", xx, xi)[0] - yy))),
        float(np.max(np.abs(diffeo.flow("beta", xx, eta)[0] - yy))),
    )
    origin = diffeo.canonical(np.array([0.0]), np.array([0.0]))
    if roundtrip > config.roundtrip_tolerance or max(abs(float(origin[0][0])), abs(float(origin[1][0]))) > 1e-12:
        raise CharacteristicInversionError(
            f"characteristic inverse is inaccurate: round trip {roundtrip:.3e}, "
            f"(t, z)(0, 0) = ({float(origin[0][0]):.3e}, {float(origin[1][0]):.3e})"
        )
    jac = diffeo.jacobian(xx, yy)
    sign = float(np.sign(jac.flat[0]))
    if sign == 0.0 or np.any(np.sign(jac) != sign):
        raise CharacteristicInversionError("Jacobian of the characteristic change of variables changes sign")
    diffeo.roundtrip_error = roundtrip
    diffeo.jacobian_min = float(np.min(np.abs(jac)))
    diffeo.jacobian_sign = sign
    logger.info(
        f"characteristic diffeomorphism on half-width {half_width:.3g}: round trip {roundtrip:.2e}, "
        f"min |J| = {diffeo.jacobian_min:.4g}"
    )
    return diffeo
