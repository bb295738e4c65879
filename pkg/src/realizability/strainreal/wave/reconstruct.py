# src/realizability/strainreal/wave/reconstruct.py
"""
From the canonical solution back to a viscosity on a disk

u(x, y) = w(t(x, y), z(x, y)) and mu = e^u, sampled on a Cartesian grid of
the original frame. Values of w between lattice nodes come from a local
4 x 4 cubic Lagrange stencil, so a value only depends on nearby nodes.
"""

import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from loguru import logger

from ..errors import RealizabilityNotEstablished
from ..fields.grid import Grid2D
from ..fields.residuals import ResidualReport, check_positive, realization_residual
from ..fields.velocity import VelocityField
from .canonical import assemble_canonical, canonical_grid, truncate_sources
from .coefficients import wave_coefficients
from .diffeo import CharacteristicDiffeo, DiffeoConfig, build_diffeomorphism
from .solver import WaveSolution, WaveSolverConfig, solve_wave
from .truncation import TruncationConfig


@dataclass(frozen=True)
class GlobalRealization:
    radius: float
    grid: Grid2D
    u: np.ndarray
    mu: np.ndarray
    mask: np.ndarray
    report: ResidualReport
    level: int
    diagnostics: dict = field(default_factory=dict, compare=False)


def output_grid(radius: float, spacing: float) -> Grid2D:
    """Square grid on multiples of `spacing` covering D(0, radius)"""
    cells = max(2, math.ceil(radius / spacing - 1e-12))
    return Grid2D.square((0.0, 0.0), cells * spacing, 2 * cells + 1)


def _lagrange_weights(offset: np.ndarray) -> np.ndarray:
    """Cubic Lagrange weights for nodes -1, 0, 1, 2 at fractional offsets in [0, 1]"""
    s = offset
    return np.stack([
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ])


def interpolate_solution(solution: WaveSolution, t: np.ndarray, z: np.ndarray) -> np.ndarray:
    grid = solution.grid
    ft = (np.asarray(t) - grid.ts[0]) / grid.dt
    fz = (np.asarray(z) - grid.zs[0]) / grid.dz
    it = np.clip(np.floor(ft).astype(int), 1, grid.ts.size - 3)
    iz = np.clip(np.floor(fz).astype(int), 1, grid.zs.size - 3)
    wt = _lagrange_weights(ft - it)
    wz = _lagrange_weights(fz - iz)
    value = np.zeros(np.shape(t))
    for i in range(4):
        for j in range(4):
            value += wt[i] * wz[j] * solution.w[it - 1 + i, iz - 1 + j]
    return value


def reconstruct_viscosity(solution: WaveSolution, diffeo: CharacteristicDiffeo, radius: float,
                          U: VelocityField, spacing: float = 0.05) -> GlobalRealization:
    """
    mu = e^u on the grid of the original frame restricted to D(0, radius), with
    the finite-difference Stokes residual curl[Div(mu e(U))] on the disk.
    """
    grid = output_grid(radius, spacing)
    xx, yy = grid.mesh()
    if diffeo.coefficients.rotated:
        xw, yw = (xx + yy) / 2.0, (xx - yy) / 2.0
    else:
        xw, yw = xx, yy
    t, z = diffeo.canonical(xw, yw)
    mask = np.hypot(xx, yy) <= radius + 1e-12

    t_needed = float(np.max(np.abs(t))) + 2.0 * solution.grid.dt
    if not solution.covers(t_needed):
        raise RealizabilityNotEstablished(
            f"the canonical wave solution stops at |t| = {solution.lifespan:.4g} "
            f"(blow-up at {solution.blowup_time}) before reaching |t| = {t_needed:.4g} needed for "
            f"D(0, {radius}); realizability is not established numerically, which does not prove it fails"
        )
    u = interpolate_solution(solution, t, z)
    mu = np.exp(u)
    check_positive(mu, grid, mask)
    report = realization_residual(mu, U, grid, margin=2, mask=mask)
    logger.info(f"global realization on D(0, {radius}): max residual {report.max_abs:.3e}")
    return GlobalRealization(radius, grid, u, mu, mask, report, level=-1)


def realize_global(U: VelocityField, radius: float, resolution: float = 0.05, spacing: float = 0.05,
                   level: Optional[int] = None, solver_config: Optional[WaveSolverConfig] = None,
                   diffeo_config: Optional[DiffeoConfig] = None,
                   truncation_config: Optional[TruncationConfig] = None,
                   executor: Optional[Executor] = None) -> GlobalRealization:
    """
    Coefficients, truncation level n_R, characteristic diffeomorphism, canonical
    system, wave solve and reconstruction for D(0, radius). `level` overrides n_R
    (used to compare disks with identical truncation inputs).
    """
    solver_config = solver_config or WaveSolverConfig()
    coeffs = wave_coefficients(U, radius)
    level_zero = truncate_sources(U, 0, truncation_config)
    n_r = max(piece.smallest_n_for_disk(radius) for piece in level_zero.all())
    n = n_r if level is None else int(level)
    sources = truncate_sources(U, n, truncation_config)

    half_width = radius + 3.0 * spacing
    diffeo = build_diffeomorphism(coeffs, half_width, diffeo_config)
    lattice = canonical_grid(diffeo, half_width, resolution, solver_config.cfl)
    system = assemble_canonical(sources, diffeo, lattice)
    solution = solve_wave(system, solver_config, executor)
    realization = reconstruct_viscosity(solution, diffeo, radius, U, spacing)
    diagnostics = {
        "n_R": n_r,
        "level": n,
        "blowup": solution.blowup,
        "lifespan": solution.lifespan,
        "jacobian_min": diffeo.jacobian_min,
        "roundtrip": diffeo.roundtrip_error,
        "rotated": coeffs.rotated,
        "coefficient_sup": system.coefficient_sup(),
        "support_radius": system.support_radius,
    }
    return GlobalRealization(realization.radius, realization.grid, realization.u, realization.mu,
                             realization.mask, realization.report, n, diagnostics)
