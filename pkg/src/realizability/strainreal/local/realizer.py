# src/realizability/strainreal/local/realizer.py
"""
Local realization around a point where the strain does not vanish

Two Cauchy problems are solved from the line x = 0 of the working frame:
the right problem with data (v0, w0) = (0, y) and the mirrored left problem
with coefficient -a(-x, y) and data (0, -y). Then

    mu = 2 v_xy / (u_xx - u_yy),    p = -mu u_xy + v_yy

on [-tau, tau]^2 with v = v+ for x >= 0 and v- for x <= 0.
"""

import math
from concurrent.futures import Executor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from loguru import logger

from ..errors import InvalidInputError, NoAdmissibleSquareError
from ..fields.expressions import ScalarFieldExpr, parse_expression
from ..fields.grid import Grid2D, sample
from ..fields.residuals import ResidualReport, realization_residual, residual_report
from ..fields.velocity import VelocityField, stream_to_velocity
from .coefficients import LocalCoefficients, local_coefficients
from .hyperbolic import HyperbolicSolution, LocalSolverConfig, solve_hyperbolic_cauchy
from .orientation import OrientationRecord, normalize_orientation

POSITIVITY_MARGIN = 0.5
DEPENDENCE_PADDING = 8
MAX_HALVINGS = 12

_ZERO = parse_expression("0")
_RIGHT_DATA = parse_expression("y")
_LEFT_DATA = parse_expression("-y")


@dataclass(frozen=True)
class HalfSquare:
    """Second derivatives of v on one closed half-square, arrays of shape (2m+1, m+1) ordered by x"""

    grid: Grid2D
    v_xx: np.ndarray
    v_xy: np.ndarray
    v_yy: np.ndarray


@dataclass(frozen=True)
class LocalRealization:
    tau: float
    grid: Grid2D
    mu: np.ndarray
    p: np.ndarray
    plus: HalfSquare
    minus: HalfSquare
    mu_halves: tuple
    p_halves: tuple
    solutions: tuple
    coefficients: LocalCoefficients
    record: OrientationRecord
    stream: ScalarFieldExpr
    u_working: ScalarFieldExpr
    interface_jump: float
    picard_iterations: int
    diagnostics: dict = field(default_factory=dict, compare=False)

    def original_points(self) -> tuple:
        xx, yy = self.grid.mesh()
        return self.record.map_points(xx, yy)

    def pressure_original(self) -> np.ndarray:
        return self.record.pressure_to_original(self.p)


@dataclass(frozen=True)
class LocalVerification:
    reports: dict

    def _worst(self, prefix: str) -> float:
        return max(r.max_abs for name, r in self.reports.items() if name.startswith(prefix))

    @property
    def max_residual(self) -> float:
        return self._worst("curl_div")

    @property
    def orthogonality_residual(self) -> float:
        return self._worst("orthogonality")

    @property
    def wave_residual(self) -> float:
        return self._worst("wave")

    def to_dict(self) -> dict:
        return {name: report.to_dict() for name, report in sorted(self.reports.items())}


def _half_square(solution: HyperbolicSolution, m: int, tau: float, mirrored: bool) -> HalfSquare:
    center = (solution.ys.size - 1) // 2
    rows = slice(center - m, center + m + 1)
    derivatives = solution.derivatives()
    v_xx = derivatives["v_xx"][rows, : m + 1]
    v_xy = derivatives["v_xy"][rows, : m + 1]
    v_yy = derivatives["v_yy"][rows, : m + 1]
    if mirrored:
        # v-(x, y) = v~(-x, y): reverse the columns, odd in x for the mixed derivative
        v_xx, v_xy, v_yy = v_xx[:, ::-1], -v_xy[:, ::-1], v_yy[:, ::-1]
        grid = Grid2D(-tau, -tau, 0.0, tau, m + 1, 2 * m + 1)
    else:
        grid = Grid2D(0.0, -tau, tau, tau, m + 1, 2 * m + 1)
    return HalfSquare(grid, v_xx, v_xy, v_yy)


def _solve_pair(coeffs: LocalCoefficients, h: float, tau: float, y_half: float,
                config: LocalSolverConfig, executor: Optional[Executor]) -> tuple:
    jobs = [
        (coeffs.extended, _RIGHT_DATA),
        (coeffs.extended.mirror(), _LEFT_DATA),
    ]

    def run(job):
        extended, w0 = job
        solution = solve_hyperbolic_cauchy(extended, _ZERO, w0, h, x_end=tau, y_half=y_half, config=config)
        return replace(solution, c=coeffs.c)

    if executor is None:
        return tuple(run(job) for job in jobs)
    return tuple(executor.map(run, jobs))


def assemble_local_realization(u: ScalarFieldExpr, center: tuple, radius: float = 1.0,
                               tau_max: Optional[float] = None, nx: int = 65,
                               config: Optional[LocalSolverConfig] = None,
                               executor: Optional[Executor] = None) -> LocalRealization:
    if nx < 5 or nx % 2 == 0:
        raise InvalidInputError(f"local realization needs an odd nx >= 5, got {nx}")
    config = config or LocalSolverConfig()
    u_working, record = normalize_orientation(u, center)
    coeffs = local_coefficients(u_working, radius, record)

    cap = min(1.0 / (2.0 * coeffs.c), radius / math.sqrt(2.0))
    if tau_max is not None:
        cap = min(cap, float(tau_max))
    m = (nx - 1) // 2
    logger.info(f"local realization at {record.center}: c = {coeffs.c:.4g}, tau_max = {cap:.4g}")

    tried = []
    for k in range(MAX_HALVINGS):
        tau = cap / 2**k
        h = tau / m
        y_half = tau * (1.0 + coeffs.c) + DEPENDENCE_PADDING * h
        plus_solution, minus_solution = _solve_pair(coeffs, h, tau, y_half, config, executor)
        plus = _half_square(plus_solution, m, tau, mirrored=False)
        minus = _half_square(minus_solution, m, tau, mirrored=True)
        worst = min(float(np.min(plus.v_xy)), float(np.min(minus.v_xy)))
        tried.append((tau, worst))
        if worst >= POSITIVITY_MARGIN:
            break
        logger.debug(f"tau = {tau:.4g} rejected: min v_xy = {worst:.4g}")
    else:
        listing = ", ".join(f"tau={t:.3g}: min v_xy={w:.3g}" for t, w in tried)
        raise NoAdmissibleSquareError(
            f"no dyadic square with v_xy >= {POSITIVITY_MARGIN} on both halves was found ({listing})"
        )

    grid = Grid2D.square((0.0, 0.0), tau, nx)
    q_expr = u_working.diff("x").diff("y")
    d_expr = u_working.diff("x", 2) - u_working.diff("y", 2)

    halves = []
    for half in (minus, plus):
        xx, yy = half.grid.mesh()
        d = d_expr(xx, yy)
        q = q_expr(xx, yy)
        mu_half = 2.0 * half.v_xy / d
        p_half = -mu_half * q + half.v_yy
        halves.append((mu_half, p_half))
    (mu_minus, p_minus), (mu_plus, p_plus) = halves

    mu = np.concatenate([mu_minus[:, :-1], 0.5 * (mu_minus[:, -1:] + mu_plus[:, :1]), mu_plus[:, 1:]], axis=1)
    p = np.concatenate([p_minus[:, :-1], 0.5 * (p_minus[:, -1:] + p_plus[:, :1]), p_plus[:, 1:]], axis=1)
    jump = max(
        float(np.max(np.abs(mu_minus[:, -1] - mu_plus[:, 0]))),
        float(np.max(np.abs(p_minus[:, -1] - p_plus[:, 0]))),
    )
    iterations = max(plus_solution.picard_iterations, minus_solution.picard_iterations)
    logger.info(f"local realization: tau = {tau:.4g}, h = {h:.4g}, interface jump = {jump:.3e}")
    return LocalRealization(
        tau=tau, grid=grid, mu=mu, p=p, plus=plus, minus=minus,
        mu_halves=(mu_minus, mu_plus), p_halves=(p_minus, p_plus),
        solutions=(plus_solution, minus_solution), coefficients=coeffs, record=record,
        stream=u, u_working=u_working, interface_jump=jump, picard_iterations=iterations,
        diagnostics={"tau_candidates": tried},
    )


def verify_local(real: LocalRealization, U: Optional[VelocityField] = None, margin: int = 4) -> LocalVerification:
    """
    Residuals on each closed half-square, in the working frame:
    orthogonality e(U):e(V) with V = R_perp grad v, nested finite-difference
    curl[Div(mu e(U))], and the wave equation v_xx - v_yy + 2 a v_xy.
    """
    U_working = stream_to_velocity(real.u_working) if U is None else real.record.velocity_to_working(U)
    u_w = U_working.stream
    q_expr = u_w.diff("x").diff("y")
    d_expr = u_w.diff("x", 2) - u_w.diff("y", 2)
    margin = max(1, min(margin, real.plus.grid.nx // 4))

    reports = {}
    for side, half, mu_half in (("plus", real.plus, real.mu_halves[1]), ("minus", real.minus, real.mu_halves[0])):
        q = sample(q_expr, half.grid)
        d = sample(d_expr, half.grid)
        orthogonality = 2.0 * q * half.v_xy + 0.5 * d * (half.v_xx - half.v_yy)
        wave = half.v_xx - half.v_yy + 2.0 * (2.0 * q / d) * half.v_xy
        reports[f"orthogonality_{side}"] = residual_report(orthogonality, half.grid, margin, label=f"orthogonality_{side}")
        reports[f"wave_{side}"] = residual_report(wave, half.grid, margin, label=f"wave_{side}")
        curl_div = realization_residual(mu_half, U_working, half.grid, margin=margin)
        reports[f"curl_div_{side}"] = ResidualReport(
            curl_div.max_abs, curl_div.l2, half.grid, label=f"curl_div_{side}"
        )
    return LocalVerification(reports)
