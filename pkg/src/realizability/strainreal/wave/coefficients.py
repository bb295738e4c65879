# src/realizability/strainreal/wave/coefficients.py
"""
Wave-equation form of realizability

With A = e(U) R_perp = [[a, b], [b, -a]], a = e12 and b = -e11, a viscosity
mu = e^u realizes e(U) iff

    A:grad^2 u + A grad u . grad u - R_perp Lap U . grad u + 1/2 Lap curl U = 0

which is hyperbolic wherever e(U) != 0 (det A = -(a^2 + b^2)).
"""

from dataclasses import dataclass

import numpy as np
import sympy
from loguru import logger

from ..errors import DegenerateAverageError, InvalidInputError
from ..fields.expressions import X, Y, ScalarFieldExpr, as_field
from ..fields.grid import Grid2D, sample
from ..fields.operators import curl, laplacian
from ..fields.velocity import VelocityField, as_matrix, stream_to_velocity, strain_of

ROTATION = np.array([[1.0, 1.0], [1.0, -1.0]])
MIN_COEFFICIENT = 1e-8


def rotate_velocity(U: VelocityField) -> VelocityField:
    """
    Change of variables x = J x' with J = [[1, 1], [1, -1]] on the stream function:
    U'(x') = -J U(J x') and M' = -J M J.
    """
    if U.stream is None:
        raise InvalidInputError("rotating a velocity field needs its stream function")
    u_rot = U.stream.subs(X + Y, X - Y)
    rotated = stream_to_velocity(u_rot)
    if U.average is not None:
        m = as_matrix(U.average)
        rotated = rotated.with_average(-ROTATION @ m @ ROTATION)
    return rotated


@dataclass(frozen=True)
class WaveCoefficients:
    a: ScalarFieldExpr
    b: ScalarFieldExpr
    alpha: ScalarFieldExpr
    beta: ScalarFieldExpr
    average: np.ndarray
    velocity: VelocityField
    rotated: bool
    min_abs_a: float
    sign_a: float

    def working_radius(self, radius: float) -> float:
        """Radius of the working disk whose image under x = J x' is D(0, radius)"""
        return radius / np.sqrt(2.0) if self.rotated else radius


def strain_coefficients(U: VelocityField) -> tuple:
    strain = strain_of(U)
    return strain.e12, -strain.e11


def wave_coefficients(U: VelocityField, radius: float = 1.0, samples: int = 81) -> WaveCoefficients:
    """
    Symbolic a, b, alpha, beta after the optional rotation that makes the
    average of a dominant. |a| is sampled over the working disk box and the unit cell.
    """
    if U.average is None:
        raise InvalidInputError("global realization needs the average matrix M of U")
    m = as_matrix(U.average)
    if np.max(np.abs(m + m.T)) <= 1e-12:
        raise DegenerateAverageError(
            "global realizability requires M + M^T != 0; the average strain of U vanishes"
        )

    rotated = abs(m[0, 0]) > 0.5 * abs(m[0, 1] + m[1, 0])
    working = rotate_velocity(U) if rotated else U
    a, b = strain_coefficients(working)
    root = as_field(sympy.sqrt(a.root**2 + b.root**2))
    alpha = (b - root) / a
    beta = (b + root) / a

    half = max(1.0, float(radius)) + 0.5
    grid = Grid2D.square((0.0, 0.0), half, samples)
    a_values = sample(a, grid)
    min_abs_a = float(np.min(np.abs(a_values)))
    if not min_abs_a > MIN_COEFFICIENT or np.any(np.sign(a_values) != np.sign(a_values[0, 0])):
        raise DegenerateAverageError(
            "global realizability needs |a| bounded away from zero, which holds for small "
            f"perturbations of the average; sampled min |a| = {min_abs_a:.3e}"
        )
    sign_a = float(np.sign(a_values[0, 0]))
    logger.info(f"wave coefficients: rotated={rotated}, min|a| = {min_abs_a:.4g}")
    return WaveCoefficients(a, b, alpha, beta, m, working, rotated, min_abs_a, sign_a)


def wave_operator_terms(u: ScalarFieldExpr, U: VelocityField) -> dict:
    """
    Pieces of e^{-u} curl[Div(e^u e(U))] = principal + quadratic - drift + source:
    A:grad^2 u, A grad u . grad u, R_perp Lap U . grad u and Lap(curl U) / 2
    """
    a, b = strain_coefficients(U)
    u_x, u_y = u.diff("x"), u.diff("y")
    principal = a * (u.diff("x", 2) - u.diff("y", 2)) + 2 * b * u_x.diff("y")
    quadratic = a * (u_x * u_x - u_y * u_y) + 2 * b * u_x * u_y
    lap_x, lap_y = laplacian(U.ux), laplacian(U.uy)
    drift = -lap_y * u_x + lap_x * u_y
    source = laplacian(curl(U)) * sympy.Rational(1, 2)
    return {"principal": principal, "quadratic": quadratic, "drift": drift, "source": source}


def wave_operator(u: ScalarFieldExpr, U: VelocityField) -> ScalarFieldExpr:
    """Symbolic e^{-u} curl[Div(e^u e(U))] assembled from a, b and U"""
    terms = wave_operator_terms(u, U)
    return terms["principal"] + terms["quadratic"] - terms["drift"] + terms["source"]


def is_hyperbolic(U: VelocityField, grid: Grid2D) -> bool:
    """det A = -(a^2 + b^2) < 0 at every sample"""
    a, b = strain_coefficients(U)
    return bool(np.all(sample(a, grid) ** 2 + sample(b, grid) ** 2 > 0.0))
