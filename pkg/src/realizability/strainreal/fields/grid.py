# src/realizability/strainreal/fields/grid.py
"""
Rectangular sampling grids, CSV export and finite-difference helpers

Arrays sampled on a Grid2D have shape (ny, nx): rows run along y, columns along x.
"""

import csv
import io
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError
from .expressions import ScalarFieldExpr


@dataclass(frozen=True)
class Grid2D:
    x0: float
    y0: float
    x1: float
    y1: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise InvalidInputError(f"grid needs at least 3 samples per axis, got {self.nx}x{self.ny}")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise InvalidInputError(
                f"grid bounds must satisfy x0 < x1 and y0 < y1, got "
                f"[{self.x0}, {self.x1}] x [{self.y0}, {self.y1}]"
            )

    @classmethod
    def square(cls, center: tuple, half_width: float, n: int) -> "Grid2D":
        cx, cy = center
        return cls(cx - half_width, cy - half_width, cx + half_width, cy + half_width, n, n)

    @property
    def hx(self) -> float:
        return (self.x1 - self.x0) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y1 - self.y0) / (self.ny - 1)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.y0, self.y1, self.ny)

    @property
    def shape(self) -> tuple:
        return (self.ny, self.nx)

    def mesh(self) -> tuple:
        return np.meshgrid(self.xs, self.ys, indexing="xy")

    def interior(self, margin: int = 1) -> tuple:
        """Slices dropping `margin` points on every side"""
        return (slice(margin, self.ny - margin), slice(margin, self.nx - margin))

    def refined(self) -> "Grid2D":
        return Grid2D(self.x0, self.y0, self.x1, self.y1, 2 * self.nx - 1, 2 * self.ny - 1)

    def describe(self) -> dict:
        return {
            "x0": self.x0, "x1": self.x1, "y0": self.y0, "y1": self.y1,
            "nx": self.nx, "ny": self.ny,
        }


def sample(expr: ScalarFieldExpr, grid: Grid2D) -> np.ndarray:
    xx, yy = grid.mesh()
    return expr(xx, yy)


def fd_dx(values: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Centered second-order x-derivative, one-sided second order on the edges"""
    return np.gradient(values, grid.hx, axis=1, edge_order=2)


def fd_dy(values: np.ndarray, grid: Grid2D) -> np.ndarray:
    return np.gradient(values, grid.hy, axis=0, edge_order=2)


def _check_shape(grid: Grid2D, *arrays) -> None:
    for array in arrays:
        if np.shape(array) != grid.shape:
            raise InvalidInputError(f"array of shape {np.shape(array)} does not match grid {grid.shape}")


def grid_to_csv(grid: Grid2D, values: np.ndarray) -> str:
    """Scalar grid as CSV text, y outer and x inner, 17 significant digits"""
    _check_shape(grid, values)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["x", "y", "value"])
    for j, y in enumerate(grid.ys):
        for i, x in enumerate(grid.xs):
            writer.writerow([format(x, ".17g"), format(y, ".17g"), format(values[j, i], ".17g")])
    return buffer.getvalue()


def matrix_grid_to_csv(grid: Grid2D, m11, m12, m21, m22) -> str:
    _check_shape(grid, m11, m12, m21, m22)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["x", "y", "v11", "v12", "v21", "v22"])
    for j, y in enumerate(grid.ys):
        for i, x in enumerate(grid.xs):
            row = [x, y, m11[j, i], m12[j, i], m21[j, i], m22[j, i]]
            writer.writerow([format(v, ".17g") for v in row])
    return buffer.getvalue()
