# src/realizability/strainreal/wave/canonical.py
"""
Canonical semilinear wave system in the characteristic variables (t, z)

For u(x, y) = w(t, z) the principal part factors as

    A:grad^2 u = F box(w) + w_t A:grad^2 t + w_z A:grad^2 z,
    F = ((a^2 + b^2) / a) xi_y eta_y,

so the truncated realizability equation becomes box(w) = B grad w . grad w + V . grad w + h with

    B = -G^T [A]_n G / F,
    V = (G^T R_perp [Lap U]_n - ([A]_n:grad^2 t, [A]_n:grad^2 z)) / F,
    h = -[Lap curl U]_n / (2 F),

G holding the columns grad t and grad z. The truncations are taken in the
original frame (where the data are 1-periodic) and transported to the working frame.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from loguru import logger

from ..errors import DegenerateAverageError
from ..fields.expressions import ScalarFieldExpr
from ..fields.operators import curl, laplacian
from ..fields.velocity import VelocityField, strain_of
from .diffeo import CharacteristicDiffeo
from .truncation import PeriodicTruncation, TruncationConfig, periodic_truncate

SUPPORT_FLOOR = 1e-14


@dataclass(frozen=True)
class TruncatedSources:
    """[e11]_n, [e12]_n, [Lap Ux]_n, [Lap Uy]_n, [Lap curl U]_n of the original field"""

    e11: PeriodicTruncation
    e12: PeriodicTruncation
    lap_ux: PeriodicTruncation
    lap_uy: PeriodicTruncation
    lap_curl: PeriodicTruncation
    level: int

    def all(self) -> tuple:
        return (self.e11, self.e12, self.lap_ux, self.lap_uy, self.lap_curl)

    def working_frame(self, x, y, rotated: bool) -> dict:
        """Truncated a, b, Lap U and Lap curl U at working-frame points"""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if rotated:
            X, Y = x + y, x - y
        else:
            X, Y = x, y
        e11 = self.e11.truncated(X, Y)
        e12 = self.e12.truncated(X, Y)
        lap_x = self.lap_ux.truncated(X, Y)
        lap_y = self.lap_uy.truncated(X, Y)
        lap_curl = self.lap_curl.truncated(X, Y)
        if rotated:
            # e' = -J e J, Lap' U' = -2 J Lap U, Lap' curl' U' = 4 Lap curl U
            e11, e12 = self._rotate_strain(e11, e12)
            lap_x, lap_y = -2.0 * (lap_x + lap_y), -2.0 * (lap_x - lap_y)
            lap_curl = 4.0 * lap_curl
        return {"a": e12, "b": -e11, "lap_x": lap_x, "lap_y": lap_y, "lap_curl": lap_curl}

    @staticmethod
    def _rotate_strain(e11: np.ndarray, e12: np.ndarray) -> tuple:
        # -J [[e11, e12], [e12, -e11]] J = [[-2 e12, -2 e11], [-2 e11, 2 e12]]
        return -2.0 * e12, -2.0 * e11


def _declared_periodic(f: ScalarFieldExpr) -> ScalarFieldExpr:
    return ScalarFieldExpr(f.root, periodic=True)


def truncate_sources(U: VelocityField, n: int, config: Optional[TruncationConfig] = None) -> TruncatedSources:
    """Truncations of the periodic data of U (original frame, U - M X declared 1-periodic)"""
    strain = strain_of(U)
    pieces = [strain.e11, strain.e12, laplacian(U.ux), laplacian(U.uy), laplacian(curl(U))]
    truncations = [periodic_truncate(_declared_periodic(f), n, config) for f in pieces]
    return TruncatedSources(*truncations, level=int(n))


@dataclass(frozen=True)
class CanonicalGrid:
    ts: np.ndarray
    zs: np.ndarray
    dt: float
    dz: float

    @property
    def k_max(self) -> int:
        return (self.ts.size - 1) // 2

    @property
    def shape(self) -> tuple:
        return (self.ts.size, self.zs.size)

    def mesh(self) -> tuple:
        return np.meshgrid(self.ts, self.zs, indexing="ij")


def canonical_grid(diffeo: CharacteristicDiffeo, half_width: float, resolution: float,
                   cfl: float = 0.9, samples: int = 33) -> CanonicalGrid:
    """
    Uniform (t, z) lattice covering the image of the working box. Time nodes
    are k dt with dt = cfl dz; the z range is widened by K + 4 cells so the
    Dirichlet ends never reach the image within K steps.
    """
    axis = np.linspace(-half_width, half_width, samples)
    xx, yy = np.meshgrid(axis, axis, indexing="xy")
    t, z = diffeo.canonical(xx, yy)
    dz = float(resolution)
    dt = cfl * dz
    k_max = math.ceil(float(np.max(np.abs(t))) / dt) + 2
    pad = k_max + 4
    j_lo = math.floor(float(np.min(z)) / dz) - pad
    j_hi = math.ceil(float(np.max(z)) / dz) + pad
    ts = dt * np.arange(-k_max, k_max + 1)
    zs = dz * np.arange(j_lo, j_hi + 1)
    return CanonicalGrid(ts, zs, dt, dz)


@dataclass(frozen=True)
class CanonicalSystem:
    grid: CanonicalGrid
    B: np.ndarray
    V: np.ndarray
    h: np.ndarray
    level: int
    support_radius: float
    provenance: str = "multiplied by a / ((a^2 + b^2) xi_y eta_y)"
    points: Optional[tuple] = field(default=None, compare=False)

    def coefficient_sup(self) -> dict:
        return {
            "B": float(np.max(np.abs(self.B))),
            "V": float(np.max(np.abs(self.V))),
            "h": float(np.max(np.abs(self.h))),
        }


def _hessian_contraction(a, b, d_xx, d_xy, d_yy):
    """A:grad^2 f = a (f_xx - f_yy) + 2 b f_xy"""
    return a * (d_xx - d_yy) + 2.0 * b * d_xy


def _support_radius(grid: CanonicalGrid, *arrays) -> float:
    tt, zz = grid.mesh()
    active = np.zeros(grid.shape, dtype=bool)
    for array in arrays:
        magnitude = np.abs(array)
        while magnitude.ndim > 2:
            magnitude = magnitude.max(axis=0)
        active |= magnitude > SUPPORT_FLOOR
    if not np.any(active):
        return 0.0
    return float(np.max(np.hypot(tt[active], zz[active])))


def assemble_canonical(sources: TruncatedSources, diffeo: CharacteristicDiffeo,
                       grid: CanonicalGrid) -> CanonicalSystem:
    coeffs = diffeo.coefficients
    tt, zz = grid.mesh()
    x, y = diffeo.pull_back(tt, zz)
    xi = diffeo.anchor_derivatives("alpha", x, y, anchor=zz + tt)
    eta = diffeo.anchor_derivatives("beta", x, y, anchor=zz - tt)

    a = coeffs.a(x, y)
    b = coeffs.b(x, y)
    factor = (a * a + b * b) / a * xi["y"] * eta["y"]
    if not np.all(np.isfinite(factor)) or np.any(factor == 0.0):
        raise DegenerateAverageError("canonical factor vanishes: the coefficient a must not vanish")

    t_d = {key: 0.5 * (xi[key] - eta[key]) for key in ("x", "y", "xx", "xy", "yy")}
    z_d = {key: 0.5 * (xi[key] + eta[key]) for key in ("x", "y", "xx", "xy", "yy")}
    data = sources.working_frame(x, y, coeffs.rotated)
    a_n, b_n = data["a"], data["b"]

    # G = [[t_x, z_x], [t_y, z_y]]; (G^T A_n G)_{ij} = A_n g_i . g_j
    grads = ((t_d["x"], t_d["y"]), (z_d["x"], z_d["y"]))

    def form(g1, g2):
        return a_n * (g1[0] * g2[0] - g1[1] * g2[1]) + b_n * (g1[0] * g2[1] + g1[1] * g2[0])

    B = np.empty((2, 2) + grid.shape)
    for i in range(2):
        for j in range(2):
            B[i, j] = -form(grads[i], grads[j]) / factor

    perp_x, perp_y = -data["lap_y"], data["lap_x"]
    V = np.empty((2,) + grid.shape)
    for i, d in enumerate((t_d, z_d)):
        drift = grads[i][0] * perp_x + grads[i][1] * perp_y
        V[i] = (drift - _hessian_contraction(a_n, b_n, d["xx"], d["xy"], d["yy"])) / factor
    h = -0.5 * data["lap_curl"] / factor

    support = _support_radius(grid, B, V, h)
    logger.info(
        f"canonical system on {grid.shape[0]}x{grid.shape[1]} nodes, level n = {sources.level}, "
        f"sup|h| = {float(np.max(np.abs(h))):.3e}, support radius {support:.3g}"
    )
    return CanonicalSystem(grid, B, V, h, sources.level, support, points=(x, y))
