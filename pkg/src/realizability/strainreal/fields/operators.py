# src/realizability/strainreal/fields/operators.py
"""
Differential operators, symbolic and finite-difference

curl U := d_x Uy - d_y Ux, Div of a matrix field acts row by row.
"""

import numpy as np

from .expressions import ScalarFieldExpr
from .grid import Grid2D, fd_dx, fd_dy
from .velocity import StrainField, VelocityField


def gradient(f: ScalarFieldExpr) -> tuple:
    return f.diff("x"), f.diff("y")


def curl(U) -> ScalarFieldExpr:
    ux, uy = (U.ux, U.uy) if isinstance(U, VelocityField) else U
    return uy.diff("x") - ux.diff("y")


def matrix_divergence(rows) -> tuple:
    """Div of [[s11, s12], [s21, s22]] = (d_x s11 + d_y s12, d_x s21 + d_y s22)"""
    (s11, s12), (s21, s22) = rows
    return s11.diff("x") + s12.diff("y"), s21.diff("x") + s22.diff("y")


def laplacian(f: ScalarFieldExpr) -> ScalarFieldExpr:
    return f.diff("x", 2) + f.diff("y", 2)


def vector_laplacian(U: VelocityField) -> tuple:
    return laplacian(U.ux), laplacian(U.uy)


def stress_divergence(mu: ScalarFieldExpr, strain: StrainField) -> tuple:
    """Div(mu e) for a symbolic viscosity"""
    return matrix_divergence(((mu * strain.e11, mu * strain.e12), (mu * strain.e12, -mu * strain.e11)))


def curl_div(mu: ScalarFieldExpr, strain: StrainField) -> ScalarFieldExpr:
    return curl(stress_divergence(mu, strain))


def fd_gradient(values: np.ndarray, grid: Grid2D) -> tuple:
    return fd_dx(values, grid), fd_dy(values, grid)


def fd_curl(vx: np.ndarray, vy: np.ndarray, grid: Grid2D) -> np.ndarray:
    return fd_dx(vy, grid) - fd_dy(vx, grid)


def fd_matrix_divergence(s11, s12, s21, s22, grid: Grid2D) -> tuple:
    return fd_dx(s11, grid) + fd_dy(s12, grid), fd_dx(s21, grid) + fd_dy(s22, grid)


def fd_laplacian(values: np.ndarray, grid: Grid2D) -> np.ndarray:
    return fd_dx(fd_dx(values, grid), grid) + fd_dy(fd_dy(values, grid), grid)


def fd_curl_div(mu: np.ndarray, e11: np.ndarray, e12: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Nested centered differences of curl[Div(mu e)] from sampled mu and strain"""
    d1, d2 = fd_matrix_divergence(mu * e11, mu * e12, mu * e12, -mu * e11, grid)
    return fd_curl(d1, d2, grid)
