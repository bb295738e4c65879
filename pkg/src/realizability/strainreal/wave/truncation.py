# src/realizability/strainreal/wave/truncation.py
"""
Compactly supported pieces of periodic functions

theta1(s) = C (1 - 16 s^2)^5 on |s| <= 1/4 is a unit-mass bump and Theta its
primitive. The window h(x, y) = h1(x) h1(y) with h1(x) = Theta(x) - Theta(x - 1)
is supported in [-1/4, 5/4]^2 and its integer translates sum to one, so

    phi_f = S_P f * h,   f = sum_{p, q} phi_f(. + p, . + q),
    [f]_n = sum_{|p|, |q| <= n} phi_f(. + p, . + q) = S_P f * H_n(x) H_n(y)

with S_P f the Fourier partial sum and H_n(x) = Theta(x + n) - Theta(x - n - 1).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from loguru import logger
from numpy.polynomial import Polynomial

from ..errors import InvalidInputError
from ..fields.expressions import ScalarFieldExpr

_BUMP = Polynomial([1.0, 0.0, -16.0]) ** 5
_PRIMITIVE = _BUMP.integ()
_MASS = _PRIMITIVE(0.25) - _PRIMITIVE(-0.25)


@dataclass
class TruncationConfig:
    cutoff: int = 32
    tail_warning: float = 1e-6
    coefficient_floor: float = 1e-15
    periodicity_tolerance: float = 1e-10


def bump(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) <= 0.25, _BUMP(s) / _MASS, 0.0)


def primitive(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    inner = (_PRIMITIVE(np.clip(s, -0.25, 0.25)) - _PRIMITIVE(-0.25)) / _MASS
    return np.where(s >= 0.25, 1.0, np.where(s <= -0.25, 0.0, inner))


def window_1d(x) -> np.ndarray:
    return primitive(x) - primitive(np.asarray(x, dtype=float) - 1.0)


def window(x, y) -> np.ndarray:
    return window_1d(x) * window_1d(y)


def partition(x, n: int) -> np.ndarray:
    """H_n(x): sum of window_1d(x + p) over |p| <= n"""
    x = np.asarray(x, dtype=float)
    return primitive(x + n) - primitive(x - n - 1.0)


def check_periodic(f: ScalarFieldExpr, tolerance: float = 1e-10, samples: int = 33) -> float:
    if not f.periodic:
        raise InvalidInputError("truncation needs a field declared 1-periodic in x and y")
    axis = np.linspace(0.0, 1.0, samples)
    xx, yy = np.meshgrid(axis, axis, indexing="xy")
    base = f(xx, yy)
    scale = 1.0 + float(np.max(np.abs(base)))
    mismatch = max(
        float(np.max(np.abs(f(xx + 1.0, yy) - base))),
        float(np.max(np.abs(f(xx, yy + 1.0) - base))),
    )
    if mismatch > tolerance * scale:
        raise InvalidInputError(
            "a field declared periodic must be 1-periodic in x and y;\n"
            f"sampled mismatch {mismatch:.3e}"
        )
    return mismatch


@dataclass(frozen=True)
class PeriodicTruncation:
    f: ScalarFieldExpr
    p: np.ndarray
    q: np.ndarray
    coefficients: np.ndarray
    tail: float
    cutoff: int
    level: int

    def series(self, x, y) -> np.ndarray:
        """Fourier partial sum over the retained modes (real part)"""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        total = np.zeros(x.shape)
        for p, q, c in zip(self.p, self.q, self.coefficients):
            phase = 2.0 * np.pi * (p * x + q * y)
            total += c.real * np.cos(phase) - c.imag * np.sin(phase)
        return total

    def phi(self, x, y) -> np.ndarray:
        return self.series(x, y) * window(x, y)

    def truncated(self, x, y, n: Optional[int] = None) -> np.ndarray:
        n = self.level if n is None else n
        return self.series(x, y) * partition(x, n) * partition(y, n)

    def reconstruct(self, x, y, shifts: int) -> np.ndarray:
        """Literal sum of phi_f(x + p, y + q) over |p|, |q| <= shifts"""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        total = np.zeros(np.broadcast_shapes(x.shape, y.shape))
        for p in range(-shifts, shifts + 1):
            for q in range(-shifts, shifts + 1):
                total += self.phi(x + p, y + q)
        return total

    def coefficient(self, p: int, q: int) -> complex:
        hit = (self.p == p) & (self.q == q)
        return complex(self.coefficients[hit][0]) if np.any(hit) else 0j

    def support_radius(self) -> float:
        """phi_f vanishes outside [-1/4, 5/4]^2, hence [f]_n outside [-n - 1/4, n + 5/4]^2"""
        return math.hypot(self.level + 1.25, self.level + 1.25)

    def smallest_n_for_disk(self, radius: float, tolerance: float = 1e-10, samples: int = 64) -> int:
        """
        Smallest n with H_n = 1 on D(0, radius): needs [-radius, radius] inside
        [1/4 - n, n + 3/4], i.e. n >= radius + 1/4. Verified by sampling.
        """
        n = max(0, math.ceil(radius + 0.25 - 1e-12))
        angles = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
        radii = np.linspace(0.0, radius, samples // 4 + 1)
        rr, aa = np.meshgrid(radii, angles)
        x, y = rr * np.cos(aa), rr * np.sin(aa)
        mismatch = float(np.max(np.abs(self.truncated(x, y, n) - self.f(x, y))))
        if mismatch > tolerance:
            logger.warning(
                f"[f]_{n} differs from f on D(0, {radius}) by {mismatch:.3e}; "
                f"the Fourier cutoff {self.cutoff} is too small for this field"
            )
        return n


def fourier_modes(f: ScalarFieldExpr, config: TruncationConfig) -> tuple:
    """
    Coefficients of f on [0, 1]^2 by the trapezoid rule (fft2), spectrally
    accurate for smooth periodic f. Returns (p, q, coefficients, tail).
    """
    samples = 4 * config.cutoff
    axis = np.arange(samples) / samples
    xx, yy = np.meshgrid(axis, axis, indexing="xy")
    spectrum = np.fft.fft2(f(xx, yy)) / samples**2
    freqs = np.rint(np.fft.fftfreq(samples, d=1.0 / samples)).astype(int)
    qq, pp = np.meshgrid(freqs, freqs, indexing="ij")
    band = np.maximum(np.abs(pp), np.abs(qq))
    tail = float(np.max(np.abs(spectrum[band > config.cutoff])))
    keep = (band <= config.cutoff) & (np.abs(spectrum) > config.coefficient_floor)
    return pp[keep], qq[keep], spectrum[keep], tail


def periodic_truncate(f: ScalarFieldExpr, n: int, config: Optional[TruncationConfig] = None) -> PeriodicTruncation:
    config = config or TruncationConfig()
    if n < 0:
        raise ValueError(f"truncation level must be non-negative, got {n}")
    check_periodic(f, config.periodicity_tolerance)
    p, q, coefficients, tail = fourier_modes(f, config)
    if tail > config.tail_warning:
        logger.warning(
            f"slow Fourier decay: tail {tail:.3e} beyond {config.cutoff} modes; "
            f"try a cutoff of {2 * config.cutoff}"
        )
    logger.debug(f"truncation of {f.text[:60]}: {len(p)} modes, tail {tail:.2e}")
    return PeriodicTruncation(f, p, q, coefficients, tail, config.cutoff, int(n))
