# src/realizability/strainreal/wave/periodize.py
"""
Periodized averages mu_k = (2k + 1)^-2 sum_{|p|, |q| <= k} mu_0(. + p, . + q)

A viscosity realizing a periodic strain on the whole plane yields periodized
averages that realize it on bounded sets; whether they stay bounded as k grows
is the diagnostic reported here.
"""

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from loguru import logger

from ..errors import InvalidInputError
from ..fields.expressions import ScalarFieldExpr
from ..fields.grid import Grid2D


@dataclass(frozen=True)
class PeriodizedAverage:
    k: int
    grid: Grid2D
    values: np.ndarray
    sup_history: tuple

    def growth(self) -> list:
        """Ratios sup mu_{j+1} / sup mu_j"""
        sups = [s for _, s in self.sup_history]
        return [b / a if a > 0 else float("inf") for a, b in zip(sups, sups[1:])]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "grid": self.grid.describe(),
            "sup_history": [{"k": j, "sup": s} for j, s in self.sup_history],
        }


def _shifted_sums_callable(mu0: Callable, k: int, xx: np.ndarray, yy: np.ndarray) -> list:
    """Running shell sums: totals[j] is the sum over |p|, |q| <= j"""
    totals = []
    total = np.zeros(xx.shape)
    for j in range(k + 1):
        for p in range(-j, j + 1):
            for q in range(-j, j + 1):
                if max(abs(p), abs(q)) == j:
                    total = total + np.broadcast_to(mu0(xx + p, yy + q), xx.shape)
        totals.append(total.copy())
    return totals


def _shifted_sums_grid(values: np.ndarray, grid: Grid2D, k: int) -> tuple:
    """Shell sums of a sampled mu_0; needs unit shifts to land on nodes"""
    steps = []
    for h in (grid.hx, grid.hy):
        cells = 1.0 / h
        if abs(cells - round(cells)) > 1e-9:
            raise InvalidInputError(f"grid spacing {h} must divide 1 to shift a sampled viscosity by integers")
        steps.append(int(round(cells)))
    sx, sy = steps
    ny, nx = grid.shape
    if nx <= 2 * k * sx or ny <= 2 * k * sy:
        raise InvalidInputError(f"the sampled viscosity does not cover the {2 * k + 1} x {2 * k + 1} shifts")
    core = (slice(k * sy, ny - k * sy), slice(k * sx, nx - k * sx))
    totals = []
    total = np.zeros((ny - 2 * k * sy, nx - 2 * k * sx))
    for j in range(k + 1):
        for p in range(-j, j + 1):
            for q in range(-j, j + 1):
                if max(abs(p), abs(q)) == j:
                    rows = slice(core[0].start + q * sy, core[0].stop + q * sy)
                    cols = slice(core[1].start + p * sx, core[1].stop + p * sx)
                    total = total + values[rows, cols]
        totals.append(total.copy())
    sub = Grid2D(grid.xs[core[1]][0], grid.ys[core[0]][0], grid.xs[core[1]][-1], grid.ys[core[0]][-1],
                 total.shape[1], total.shape[0])
    return totals, sub


def periodized_average(mu0: Union[ScalarFieldExpr, Callable, np.ndarray], k: int,
                       grid: Grid2D) -> PeriodizedAverage:
    """
    mu_k on `grid` (an expression or callable is evaluated at the shifted
    points; a sampled array lives on `grid` and the result on the part of
    it where all shifts stay inside). The sup history covers j = 0..k.
    """
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    if isinstance(mu0, np.ndarray):
        if mu0.shape != grid.shape:
            raise InvalidInputError(f"sampled viscosity has shape {mu0.shape}, grid has {grid.shape}")
        totals, out_grid = _shifted_sums_grid(mu0, grid, k)
    else:
        xx, yy = grid.mesh()
        totals = _shifted_sums_callable(mu0, k, xx, yy)
        out_grid = grid

    history = []
    for j, total in enumerate(totals):
        average = total / (2 * j + 1) ** 2
        history.append((j, float(np.max(average))))
    values = totals[-1] / (2 * k + 1) ** 2
    logger.debug(f"periodized averages up to k = {k}: sup {history[-1][1]:.4g}")
    return PeriodizedAverage(int(k), out_grid, values, tuple(history))
