# src/realizability/strainreal/fields/residuals.py
"""
Residual reports and the Stokes realization oracle curl[Div(mu e(U))] = 0
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from ..errors import NonPositiveViscosityError
from .expressions import ScalarFieldExpr
from .grid import Grid2D, sample
from .operators import curl_div, fd_curl_div
from .velocity import VelocityField, strain_of


@dataclass(frozen=True)
class ResidualReport:
    max_abs: float
    l2: float
    grid: Grid2D
    convergence_order: Optional[float] = None
    label: str = ""
    cross_check: Optional["ResidualReport"] = field(default=None, compare=False)

    def __post_init__(self):
        if not (self.max_abs >= 0 and self.l2 >= 0):
            raise ValueError(f"residual norms must be non-negative, got {self.max_abs}, {self.l2}")

    def with_order(self, coarse: "ResidualReport") -> "ResidualReport":
        return replace(self, convergence_order=estimate_order(coarse.max_abs, self.max_abs))

    def to_dict(self) -> dict:
        data = {
            "label": self.label,
            "max_abs": self.max_abs,
            "l2": self.l2,
            "grid": self.grid.describe(),
            "convergence_order": self.convergence_order,
        }
        if self.cross_check is not None:
            data["cross_check"] = self.cross_check.to_dict()
        return data


def estimate_order(coarse: float, fine: float, ratio: float = 2.0) -> Optional[float]:
    """Observed order from errors on two grids whose spacings differ by `ratio`"""
    if coarse <= 0 or fine <= 0 or not (math.isfinite(coarse) and math.isfinite(fine)):
        return None
    return math.log(coarse / fine) / math.log(ratio)


def residual_report(values: np.ndarray, grid: Grid2D, margin: int = 0,
                    mask: Optional[np.ndarray] = None, label: str = "") -> ResidualReport:
    """Sup and discrete L2 norms over the interior, optionally restricted to a mask"""
    selection = np.zeros(grid.shape, dtype=bool)
    selection[grid.interior(margin) if margin else (slice(None), slice(None))] = True
    if mask is not None:
        selection &= mask
    picked = np.abs(np.asarray(values)[selection])
    if picked.size == 0:
        return ResidualReport(0.0, 0.0, grid, label=label)
    max_abs = float(np.max(picked))
    l2 = float(np.sqrt(grid.hx * grid.hy * np.sum(picked**2)))
    return ResidualReport(max_abs, l2, grid, label=label)


def check_positive(mu_values: np.ndarray, grid: Grid2D, mask: Optional[np.ndarray] = None) -> None:
    region = np.ones(grid.shape, dtype=bool) if mask is None else mask
    bad = region & ~(mu_values > 0)
    if np.any(bad):
        j, i = np.argwhere(bad)[0]
        location = (float(grid.xs[i]), float(grid.ys[j]))
        raise NonPositiveViscosityError(
            f"realizability requires a positive viscosity; mu = {mu_values[j, i]:.6g} at {location}",
            location,
        )


def realization_residual(mu: Union[ScalarFieldExpr, np.ndarray], U: VelocityField, grid: Grid2D,
                         margin: int = 2, mask: Optional[np.ndarray] = None) -> ResidualReport:
    """
    Pointwise curl[Div(mu e(U))] on the grid.

    With a symbolic mu the exact pipeline is the primary report and nested
    finite differences are attached as cross_check. A sampled mu only gets the
    finite-difference pipeline.
    """
    strain = strain_of(U)
    e11 = sample(strain.e11, grid)
    e12 = sample(strain.e12, grid)
    mu_values = sample(mu, grid) if isinstance(mu, ScalarFieldExpr) else np.asarray(mu, dtype=float)
    check_positive(mu_values, grid, mask)

    fd_values = fd_curl_div(mu_values, e11, e12, grid)
    fd_report = residual_report(fd_values, grid, margin, mask, label="curl_div_fd")
    if not isinstance(mu, ScalarFieldExpr):
        return fd_report

    exact = sample(curl_div(mu, strain), grid)
    report = residual_report(exact, grid, margin, mask, label="curl_div_symbolic")
    return replace(report, cross_check=fd_report)
