# src/realizability/strainreal/local/orientation.py
"""
Normalise a stream function around the center point

Working coordinates X' relate to the original ones by X = X* + T X' with
T = [[1, 1], [1, -1]] when the rotation is applied (identity otherwise).
The rotation maps (u_xx - u_yy, u_xy) at the origin to (4 u_xy, u_xx - u_yy).
"""

import math
from dataclasses import dataclass

import numpy as np
import sympy
from loguru import logger

from ..errors import InvalidInputError, StrainVanishesError
from ..fields.expressions import X, Y, ScalarFieldExpr
from ..fields.velocity import VelocityField, stream_to_velocity

STRAIN_FLOOR = 1e-10


@dataclass(frozen=True)
class OrientationRecord:
    center: tuple
    rotated: bool
    flipped: bool

    @property
    def pressure_scale(self) -> float:
        scale = -0.5 if self.rotated else 1.0
        return -scale if self.flipped else scale

    def to_original(self, xp, yp) -> tuple:
        cx, cy = self.center
        xp = np.asarray(xp, dtype=float)
        yp = np.asarray(yp, dtype=float)
        if self.rotated:
            return cx + xp + yp, cy + xp - yp
        return cx + xp, cy + yp

    def to_working(self, x, y) -> tuple:
        cx, cy = self.center
        dx = np.asarray(x, dtype=float) - cx
        dy = np.asarray(y, dtype=float) - cy
        if self.rotated:
            return (dx + dy) / 2.0, (dx - dy) / 2.0
        return dx, dy

    def map_points(self, xp, yp) -> tuple:
        """Original coordinates of working-frame sample points"""
        return self.to_original(xp, yp)

    def pressure_to_original(self, p_working: np.ndarray) -> np.ndarray:
        """Pressure values at mapped points; viscosity values carry over unchanged"""
        return self.pressure_scale * np.asarray(p_working)

    def stream_to_working(self, u: ScalarFieldExpr) -> ScalarFieldExpr:
        cx, cy = (sympy.nsimplify(c, rational=True) for c in self.center)
        working = u.subs(X + cx, Y + cy)
        if self.rotated:
            working = working.subs(X + Y, X - Y)
        return -working if self.flipped else working

    def velocity_to_working(self, U: VelocityField) -> VelocityField:
        if U.stream is None:
            raise InvalidInputError("mapping a velocity to the working frame needs its stream function")
        return stream_to_velocity(self.stream_to_working(U.stream))

    def to_dict(self) -> dict:
        return {"center": list(self.center), "rotated": self.rotated, "flipped": self.flipped}


def _second_derivatives_at_origin(u: ScalarFieldExpr) -> tuple:
    d = float((u.diff("x", 2) - u.diff("y", 2))(0.0, 0.0))
    q = float(u.diff("x").diff("y")(0.0, 0.0))
    return d, q


def normalize_orientation(u: ScalarFieldExpr, center: tuple) -> tuple:
    """Return (u', record) with u'_xx - u'_yy > 0 at the origin of the working frame"""
    center = (float(center[0]), float(center[1]))
    translated = OrientationRecord(center, False, False).stream_to_working(u)
    d, q = _second_derivatives_at_origin(translated)
    if not (math.isfinite(d) and math.isfinite(q)):
        raise InvalidInputError(f"stream function second derivatives are not finite at {center}")
    strain_norm = math.sqrt(2.0 * q * q + 0.5 * d * d)
    if strain_norm <= STRAIN_FLOOR:
        raise StrainVanishesError(
            f"local realizability requires e(U)(X*) != 0; the strain vanishes at center {center} "
            f"(|e(U)| = {strain_norm:.3e})"
        )

    rotated = abs(d) < 4.0 * abs(q)
    if rotated:
        d = 4.0 * q
    flipped = d < 0.0
    record = OrientationRecord(center, rotated, flipped)
    logger.debug(f"orientation at {center}: rotated={rotated} flipped={flipped}")
    return record.stream_to_working(u), record
