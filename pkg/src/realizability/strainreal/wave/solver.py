# src/realizability/strainreal/wave/solver.py
"""
Explicit leapfrog for box(w) = w_tt - w_zz = B grad w . grad w + V . grad w + h
with w(0, z) = w_t(0, z) = 0, marched from t = 0 in both time directions.

The nonlinear term at level k uses w_t from the one-sided BDF2 difference of
the three latest levels and w_z from centered differences. Ends in z are
Dirichlet. A march stops at the first level that is non-finite, exceeds the
sup threshold or more than doubles the energy.
"""

import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from loguru import logger
from scipy.integrate import dblquad

from .canonical import CanonicalGrid, CanonicalSystem


@dataclass
class WaveSolverConfig:
    cfl: float = 0.9
    blowup_sup: float = 50.0
    energy_factor: float = 2.0
    energy_floor: float = 1e-10
    energy_min_level: int = 4


@dataclass(frozen=True)
class WaveSolution:
    grid: CanonicalGrid
    w: np.ndarray
    energy: dict
    blowup: bool
    blowup_time: Optional[float]
    valid_levels: tuple
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def lifespan(self) -> float:
        """Largest |t| reached by both marches before any stop"""
        lower, upper = self.valid_levels
        return min(abs(lower), upper) * self.grid.dt

    def covers(self, t_needed: float) -> bool:
        lower, upper = self.valid_levels
        return -lower * self.grid.dt >= t_needed and upper * self.grid.dt >= t_needed


def _forcing(system: CanonicalSystem, k_index: int, w_t: np.ndarray, w_z: np.ndarray) -> np.ndarray:
    B = system.B[:, :, k_index]
    V = system.V[:, k_index]
    quadratic = B[0, 0] * w_t * w_t + (B[0, 1] + B[1, 0]) * w_t * w_z + B[1, 1] * w_z * w_z
    return quadratic + V[0] * w_t + V[1] * w_z + system.h[k_index]


def _second_difference(w: np.ndarray, dz: float) -> np.ndarray:
    out = np.zeros_like(w)
    out[1:-1] = (w[2:] - 2.0 * w[1:-1] + w[:-2]) / dz**2
    return out


def _centered(w: np.ndarray, dz: float) -> np.ndarray:
    out = np.zeros_like(w)
    out[1:-1] = (w[2:] - w[:-2]) / (2.0 * dz)
    return out


def _march(system: CanonicalSystem, direction: int, config: WaveSolverConfig) -> tuple:
    """Fill levels k = 1..K in `direction`; returns (levels, energies, last valid k, blow-up k)"""
    grid = system.grid
    center = grid.k_max
    dt, dz = grid.dt, grid.dz
    levels = {0: np.zeros(grid.zs.size)}
    energies = {0: 0.0}

    first = 0.5 * dt * dt * system.h[center]
    first[0] = first[-1] = 0.0
    levels[1] = first
    ghost = first
    last_valid = 1
    for k in range(1, grid.k_max):
        current, previous = levels[k], levels[k - 1]
        before = levels[k - 2] if k >= 2 else ghost
        w_t = direction * (3.0 * current - 4.0 * previous + before) / (2.0 * dt)
        w_z = _centered(current, dz)
        energy = float(np.sum(w_t * w_t + w_z * w_z) * dz)
        energies[k] = energy
        index = center + direction * k
        stop = None
        if not np.all(np.isfinite(current)) or not math.isfinite(energy):
            stop = "non-finite values"
        elif float(np.max(np.abs(current))) > config.blowup_sup:
            stop = f"sup|w| above {config.blowup_sup}"
        elif (k >= config.energy_min_level and energies[k - 1] > config.energy_floor
              and energy > config.energy_factor * energies[k - 1]):
            stop = "energy more than doubled"
        if stop is not None:
            logger.info(f"wave march ({'+' if direction > 0 else '-'}t) stopped at t = {direction * k * dt:.4g}: {stop}")
            return levels, energies, k - 1, k
        forcing = _forcing(system, index, w_t, w_z)
        following = 2.0 * current - previous + dt * dt * (_second_difference(current, dz) + forcing)
        following[0] = following[-1] = 0.0
        levels[k + 1] = following
        last_valid = k + 1
    return levels, energies, last_valid, None


def solve_wave(system: CanonicalSystem, config: Optional[WaveSolverConfig] = None,
               executor: Optional[Executor] = None) -> WaveSolution:
    config = config or WaveSolverConfig()
    grid = system.grid
    if abs(grid.dt - config.cfl * grid.dz) > 1e-12 * grid.dz:
        raise ValueError(f"time step {grid.dt} must equal {config.cfl} x space step {grid.dz}")
    center = grid.k_max

    if executor is None:
        results = [_march(system, d, config) for d in (1, -1)]
    else:
        results = list(executor.map(lambda d: _march(system, d, config), (1, -1)))

    w = np.full(grid.shape, np.nan)
    energy = {}
    valid = []
    blowups = []
    for direction, (levels, energies, last_valid, blowup_k) in zip((1, -1), results):
        for k in range(0, last_valid + 1):
            w[center + direction * k] = levels[k]
        for k, value in energies.items():
            energy[direction * k * grid.dt] = value
        valid.append(direction * last_valid)
        if blowup_k is not None:
            blowups.append(blowup_k * grid.dt)

    blowup = bool(blowups)
    blowup_time = min(blowups) if blowups else None
    upper, lower = valid
    return WaveSolution(grid, w, dict(sorted(energy.items())), blowup, blowup_time, (lower, upper))


def wave_residual(solution: WaveSolution, system: CanonicalSystem) -> np.ndarray:
    """Discrete box(w) - H(t, z, grad w) at interior nodes, centered in t and z"""
    grid = system.grid
    w = solution.w
    dt, dz = grid.dt, grid.dz
    w_tt = (w[2:, 1:-1] - 2.0 * w[1:-1, 1:-1] + w[:-2, 1:-1]) / dt**2
    w_zz = (w[1:-1, 2:] - 2.0 * w[1:-1, 1:-1] + w[1:-1, :-2]) / dz**2
    w_t = (w[2:, 1:-1] - w[:-2, 1:-1]) / (2.0 * dt)
    w_z = (w[1:-1, 2:] - w[1:-1, :-2]) / (2.0 * dz)
    B = system.B[:, :, 1:-1, 1:-1]
    V = system.V[:, 1:-1, 1:-1]
    rhs = (B[0, 0] * w_t**2 + (B[0, 1] + B[1, 0]) * w_t * w_z + B[1, 1] * w_z**2
           + V[0] * w_t + V[1] * w_z + system.h[1:-1, 1:-1])
    return w_tt - w_zz - rhs


def duhamel_oracle(forcing: Callable, t: float, z: float) -> float:
    """
    Solution of box(w) = h with zero data:
    1/2 int over the backward light cone of (t, z) of h, by scipy dblquad.
    """
    if t == 0.0:
        return 0.0
    if t > 0.0:
        value, _ = dblquad(lambda zeta, s: forcing(s, zeta), 0.0, t,
                           lambda s: z - (t - s), lambda s: z + (t - s), epsabs=1e-12, epsrel=1e-10)
    else:
        value, _ = dblquad(lambda zeta, s: forcing(s, zeta), t, 0.0,
                           lambda s: z - (s - t), lambda s: z + (s - t), epsabs=1e-12, epsrel=1e-10)
    return 0.5 * value


def model_bump(z) -> np.ndarray:
    """(1 - (z/2)^2)^4 on |z| < 2"""
    z = np.asarray(z, dtype=float)
    return np.where(np.abs(z) < 2.0, (1.0 - (z / 2.0) ** 2) ** 4, 0.0)


def model_system(amplitude: float, horizon: float = 3.5, resolution: float = 0.05,
                 cfl: float = 0.9, quadratic: bool = True) -> CanonicalSystem:
    """B = bump e1 (x) e1, V = 0, h = amplitude bump on a lattice reaching |t| = horizon"""
    dz = resolution
    dt = cfl * dz
    k_max = math.ceil(horizon / dt) + 2
    half_cells = math.ceil(2.0 / dz) + k_max + 4
    ts = dt * np.arange(-k_max, k_max + 1)
    zs = dz * np.arange(-half_cells, half_cells + 1)
    grid = CanonicalGrid(ts, zs, dt, dz)
    profile = np.broadcast_to(model_bump(zs), grid.shape)
    B = np.zeros((2, 2) + grid.shape)
    if quadratic:
        B[0, 0] = profile
    V = np.zeros((2,) + grid.shape)
    h = amplitude * np.array(profile)
    return CanonicalSystem(grid, B, V, h, level=0, support_radius=float(np.hypot(ts[-1], 2.0)),
                           provenance="model bump system")


@dataclass(frozen=True)
class SweepResult:
    amplitudes: tuple
    blowup: tuple
    lifespans: tuple

    @property
    def threshold(self) -> Optional[float]:
        """Smallest amplitude of the sweep whose solution blew up"""
        hits = [a for a, flag in zip(self.amplitudes, self.blowup) if flag]
        return min(hits) if hits else None

    def rows(self) -> list:
        return [
            {"amplitude": a, "blowup": flag, "lifespan": life}
            for a, flag, life in zip(self.amplitudes, self.blowup, self.lifespans)
        ]


def amplitude_sweep(amplitudes, horizon: float = 3.5, resolution: float = 0.05,
                    config: Optional[WaveSolverConfig] = None,
                    executor: Optional[Executor] = None) -> SweepResult:
    """Lifespan of the model system for each forcing amplitude; results keep input order"""
    config = config or WaveSolverConfig()
    amplitudes = tuple(float(a) for a in amplitudes)

    def run(amplitude):
        solution = solve_wave(model_system(amplitude, horizon, resolution, config.cfl), config)
        return solution.blowup, solution.lifespan

    outcomes = list(executor.map(run, amplitudes)) if executor is not None else [run(a) for a in amplitudes]
    for amplitude, (flag, life) in zip(amplitudes, outcomes):
        logger.debug(f"amplitude {amplitude:.4g}: blowup={flag}, lifespan={life:.4g}")
    return SweepResult(amplitudes, tuple(o[0] for o in outcomes), tuple(o[1] for o in outcomes))
