# src/realizability/strainreal/fields/velocity.py
"""
Divergence-free velocity fields built from stream functions, and their strains
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import sympy

from ..errors import InvalidInputError
from .expressions import X, Y, ScalarFieldExpr, as_field
from .grid import Grid2D


def as_matrix(values) -> np.ndarray:
    """Accept a flat (m11, m12, m21, m22) sequence or a 2x2 array"""
    matrix = np.asarray(values, dtype=float)
    if matrix.shape == (4,):
        matrix = matrix.reshape(2, 2)
    if matrix.shape != (2, 2):
        raise InvalidInputError(f"expected a 2x2 matrix, got shape {matrix.shape}")
    return matrix


@dataclass(frozen=True)
class VelocityField:
    ux: ScalarFieldExpr
    uy: ScalarFieldExpr
    average: Optional[tuple] = None
    stream: Optional[ScalarFieldExpr] = None

    def __call__(self, x, y) -> tuple:
        return self.ux(x, y), self.uy(x, y)

    @property
    def average_matrix(self) -> Optional[np.ndarray]:
        return None if self.average is None else as_matrix(self.average)

    def divergence(self) -> ScalarFieldExpr:
        return self.ux.diff("x") + self.uy.diff("y")

    def with_average(self, matrix) -> "VelocityField":
        matrix = as_matrix(matrix)
        if abs(matrix[0, 0] + matrix[1, 1]) > 1e-12:
            raise InvalidInputError(f"average matrix must be trace-free, trace = {np.trace(matrix)}")
        return VelocityField(self.ux, self.uy, tuple(matrix.ravel()), self.stream)


@dataclass(frozen=True)
class StrainField:
    """Symmetric trace-free strain; e22 = -e11 and e21 = e12 are implicit"""

    e11: ScalarFieldExpr
    e12: ScalarFieldExpr

    @property
    def e22(self) -> ScalarFieldExpr:
        return -self.e11

    @property
    def e21(self) -> ScalarFieldExpr:
        return self.e12

    def sample(self, grid: Grid2D) -> tuple:
        xx, yy = grid.mesh()
        e11 = self.e11(xx, yy)
        e12 = self.e12(xx, yy)
        return e11, e12, e12.copy(), -e11

    def norm(self, x, y) -> np.ndarray:
        """Frobenius norm sqrt(2 e11^2 + 2 e12^2)"""
        return np.sqrt(2.0 * self.e11(x, y) ** 2 + 2.0 * self.e12(x, y) ** 2)


def stream_to_velocity(u: ScalarFieldExpr) -> VelocityField:
    """U = R_perp grad u = (-u_y, u_x)"""
    return VelocityField(-u.diff("y"), u.diff("x"), stream=u)


def strain_of(U: VelocityField) -> StrainField:
    e11 = U.ux.diff("x")
    e12 = (U.ux.diff("y") + U.uy.diff("x")) * sympy.Rational(1, 2)
    return StrainField(e11, e12)


def affine_stream(matrix) -> ScalarFieldExpr:
    """Stream function of U = M X for a trace-free M"""
    m = as_matrix(matrix)
    if abs(m[0, 0] + m[1, 1]) > 1e-12:
        raise InvalidInputError(
            "an affine divergence-free field needs a trace-free matrix, "
            f"got trace {m[0, 0] + m[1, 1]}"
        )
    m11, m12, m21 = (sympy.nsimplify(float(v)) for v in (m[0, 0], m[0, 1], m[1, 0]))
    return as_field(m21 * X**2 / 2 - m11 * X * Y - m12 * Y**2 / 2)


def divergence_defect(U: VelocityField, grid: Grid2D) -> float:
    """Sampled |div U| relative to 1 + max|DU|"""
    xx, yy = grid.mesh()
    div = U.divergence()(xx, yy)
    scale = 1.0 + max(
        float(np.max(np.abs(component.diff(var)(xx, yy))))
        for component in (U.ux, U.uy)
        for var in ("x", "y")
    )
    return float(np.max(np.abs(div))) / scale


def check_periodic_part(U: VelocityField, grid: Grid2D, tolerance: float = 1e-10) -> float:
    """
    Largest mismatch of X -> U(X) - M X under unit shifts in x and y.
    Raises InvalidInputError above `tolerance`.
    """
    m = U.average_matrix
    if m is None:
        raise InvalidInputError("periodicity check needs the average matrix M")
    xx, yy = grid.mesh()

    def periodic_part(x, y):
        ux, uy = U(x, y)
        return ux - (m[0, 0] * x + m[0, 1] * y), uy - (m[1, 0] * x + m[1, 1] * y)

    base = periodic_part(xx, yy)
    mismatch = 0.0
    for dx, dy in ((1.0, 0.0), (0.0, 1.0)):
        shifted = periodic_part(xx + dx, yy + dy)
        for a, b in zip(base, shifted):
            mismatch = max(mismatch, float(np.max(np.abs(a - b))))
    if mismatch > tolerance:
        raise InvalidInputError(
            "U(X) - M X must be 1-periodic in x and y;\n"
            f"sampled mismatch {mismatch:.3e} exceeds {tolerance:.1e}"
        )
    return mismatch
