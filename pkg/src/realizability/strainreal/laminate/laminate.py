# src/realizability/strainreal/laminate/laminate.py
"""
Two-phase rank-one laminates

A laminate strain takes the value E1 where chi(X . xi) = 1 and E2 elsewhere.
It is a strain field iff E1 - E2 = lambda xi (.) R_perp xi, and it is isotropically
realizable iff a positive pair (mu1, mu2) makes (mu1 E1 - mu2 E2) xi parallel to xi.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from loguru import logger
from scipy.optimize import brentq

from ..errors import InvalidInputError, LaminateIncompatibleError, LaminateNotRealizableError
from ..fields.grid import Grid2D
from ..fields.velocity import as_matrix

R_PERP = np.array([[0.0, -1.0], [1.0, 0.0]])
MATRIX_TOLERANCE = 1e-12
CROSS_TOLERANCE = 1e-9


def _check_strain_matrix(E: np.ndarray, name: str) -> np.ndarray:
    E = as_matrix(E)
    scale = 1.0 + float(np.max(np.abs(E)))
    if abs(E[0, 1] - E[1, 0]) > MATRIX_TOLERANCE * scale:
        raise InvalidInputError(f"{name} must be symmetric, got off-diagonal entries {E[0, 1]} and {E[1, 0]}")
    if abs(E[0, 0] + E[1, 1]) > MATRIX_TOLERANCE * scale:
        raise InvalidInputError(f"{name} must be trace-free, got trace {E[0, 0] + E[1, 1]}")
    return E


def _unit(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float).reshape(-1)
    if xi.shape != (2,):
        raise InvalidInputError(f"lamination direction must have two components, got {xi.size}")
    norm = float(np.hypot(*xi))
    if norm == 0.0:
        raise InvalidInputError("lamination direction must be non-zero")
    if abs(norm - 1.0) > 1e-14:
        logger.debug(f"normalizing lamination direction of length {norm}")
    return xi / norm


def frobenius(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.sum(A * B))


def lamination_matrix(xi) -> np.ndarray:
    """xi (.) R_perp xi, the symmetrized tensor product"""
    xi = _unit(xi)
    eta = R_PERP @ xi
    return 0.5 * (np.outer(xi, eta) + np.outer(eta, xi))


def normal_shear(E: np.ndarray, xi) -> float:
    """E R_perp xi . xi"""
    xi = _unit(xi)
    return float((E @ (R_PERP @ xi)) @ xi)


def _same(E1: np.ndarray, E2: np.ndarray) -> bool:
    return bool(np.allclose(E1, E2, rtol=0.0, atol=1e-14))


def strain_compatibility(E1, E2, xi) -> float:
    """lambda with E1 - E2 = lambda xi (.) R_perp xi; rejects jumps of any other shape"""
    E1 = _check_strain_matrix(E1, "E1")
    E2 = _check_strain_matrix(E2, "E2")
    L = lamination_matrix(xi)
    jump = E1 - E2
    lam = frobenius(jump, L) / frobenius(L, L)
    defect = float(np.max(np.abs(jump - lam * L)))
    if defect > MATRIX_TOLERANCE * (1.0 + float(np.max(np.abs(jump)))):
        raise LaminateIncompatibleError(
            "a laminate is a strain field only if E1 - E2 is a multiple of xi (.) R_perp xi;\n"
            f"the jump {jump.tolist()} leaves a defect {defect:.3e} along xi = {_unit(xi).tolist()}"
        )
    return lam


def criterion_terms(E1, E2) -> tuple:
    """(E1:E2, (|E1|^2 |E2|^2 + (E1:E2)^2) / (|E1|^2 + |E2|^2))"""
    E1, E2 = as_matrix(E1), as_matrix(E2)
    inner = frobenius(E1, E2)
    n1, n2 = frobenius(E1, E1), frobenius(E2, E2)
    if n1 + n2 == 0.0:
        return inner, 0.0
    return inner, (n1 * n2 + inner * inner) / (n1 + n2)


def is_realizable(E1, E2) -> bool:
    E1, E2 = as_matrix(E1), as_matrix(E2)
    if _same(E1, E2):
        return True
    inner = frobenius(E1, E2)
    n1, n2 = frobenius(E1, E1), frobenius(E2, E2)
    # multiplied through by |E1|^2 + |E2|^2 > 0
    return inner * (n1 + n2) > n1 * n2 + inner * inner


def sign_test(E1, E2, xi) -> bool:
    """(E1 R_perp xi . xi)(E2 R_perp xi . xi) > 0, or E1 = E2"""
    E1, E2 = as_matrix(E1), as_matrix(E2)
    if _same(E1, E2):
        return True
    return normal_shear(E1, xi) * normal_shear(E2, xi) > 0.0


@dataclass(frozen=True)
class LaminateField:
    E1: np.ndarray
    E2: np.ndarray
    xi: np.ndarray
    lam: float
    fraction: float = 0.5
    period: float = 1.0

    def chi(self, x, y) -> np.ndarray:
        """Square-wave profile: 1 on the first `fraction` of each period along xi"""
        s = np.asarray(x) * self.xi[0] + np.asarray(y) * self.xi[1]
        return (np.mod(s / self.period, 1.0) < self.fraction).astype(float)

    def to_dict(self) -> dict:
        return {
            "E1": self.E1.tolist(),
            "E2": self.E2.tolist(),
            "xi": self.xi.tolist(),
            "lambda": self.lam,
            "profile": {"kind": "square", "fraction": self.fraction, "period": self.period},
        }


def laminate_field(E1, E2, xi, fraction: float = 0.5, period: float = 1.0) -> LaminateField:
    if not 0.0 < fraction < 1.0 or period <= 0.0:
        raise InvalidInputError(f"profile needs 0 < fraction < 1 and a positive period, got {fraction}, {period}")
    lam = strain_compatibility(E1, E2, xi)
    return LaminateField(as_matrix(E1), as_matrix(E2), _unit(xi), lam, fraction, period)


@dataclass(frozen=True)
class LaminateRealization:
    mu1: float
    mu2: float
    pressure_jump: float
    cross_component: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def mu_ratio(self) -> float:
        return self.mu1 / self.mu2

    def to_dict(self) -> dict:
        return {
            "mu1": self.mu1,
            "mu2": self.mu2,
            "mu_ratio": self.mu_ratio,
            "pressure_jump": self.pressure_jump,
            "cross_component": self.cross_component,
        }


def realize_laminate(E1, E2, xi) -> LaminateRealization:
    """
    mu1 / mu2 = (E2 R_perp xi . xi) / (E1 R_perp xi . xi), normalized to mu1 mu2 = 1,
    and p1 - p2 = (mu1 E1 - mu2 E2) xi . xi.
    """
    lam = strain_compatibility(E1, E2, xi)
    E1, E2 = as_matrix(E1), as_matrix(E2)
    xi = _unit(xi)
    if _same(E1, E2):
        return LaminateRealization(1.0, 1.0, 0.0, 0.0, {"lambda": lam})
    if not is_realizable(E1, E2):
        inner, bound = criterion_terms(E1, E2)
        raise LaminateNotRealizableError(
            "a laminate is isotropically realizable only if E1:E2 > "
            "(|E1|^2 |E2|^2 + (E1:E2)^2) / (|E1|^2 + |E2|^2) or E1 = E2;\n"
            f"here E1:E2 = {inner:.6g} <= {bound:.6g}"
        )
    s1, s2 = normal_shear(E1, xi), normal_shear(E2, xi)
    ratio = s2 / s1
    mu1, mu2 = math.sqrt(ratio), 1.0 / math.sqrt(ratio)
    traction = (mu1 * E1 - mu2 * E2) @ xi
    cross = float(traction @ (R_PERP @ xi))
    jump = float(traction @ xi)
    logger.debug(f"laminate realized: mu1/mu2 = {ratio:.6g}, pressure jump {jump:.6g}")
    return LaminateRealization(mu1, mu2, jump, cross, {"lambda": lam, "shear": (s1, s2)})


def brute_force_realizable(E1, E2, xi, ratios: Optional[np.ndarray] = None) -> bool:
    """
    Independent check: scan mu1/mu2 over a log grid and refine sign changes of
    the cross component r s1 - s2 of (r E1 - E2) xi with brentq.
    """
    E1, E2 = as_matrix(E1), as_matrix(E2)
    if _same(E1, E2):
        return True
    if ratios is None:
        ratios = np.logspace(-6.0, 6.0, 241)
    s1, s2 = normal_shear(E1, xi), normal_shear(E2, xi)
    scale = max(abs(s1), abs(s2), 1e-300)

    def cross(r):
        return (r * s1 - s2) / scale

    values = np.array([cross(r) for r in ratios])
    if np.any(np.abs(values) <= CROSS_TOLERANCE):
        return True
    changes = np.nonzero(np.sign(values[:-1]) != np.sign(values[1:]))[0]
    for i in changes:
        root = brentq(cross, ratios[i], ratios[i + 1], xtol=1e-14, rtol=1e-14)
        if root > 0.0 and abs(cross(root)) <= CROSS_TOLERANCE:
            return True
    return False


def laminate_profile(lam_field: LaminateField, realization: LaminateRealization, grid: Grid2D) -> dict:
    """Piecewise-constant mu and p grids (p = 0 in the second phase) for export"""
    xx, yy = grid.mesh()
    phase = lam_field.chi(xx, yy)
    mu = phase * realization.mu1 + (1.0 - phase) * realization.mu2
    p = phase * realization.pressure_jump
    return {"chi": phase, "mu": mu, "p": p}
