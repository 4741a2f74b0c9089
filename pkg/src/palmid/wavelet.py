"""Two-dimensional Daubechies-2 wavelet decomposition with periodic boundaries.

The transform is separable: every 1-D pass computes

    approx[n] = sum_k lowpass[k]  * x[(2n + k) mod L]
    detail[n] = sum_k highpass[k] * x[(2n + k) mod L]

i.e. circular correlation with the four analysis taps followed by
decimation at even phase. The filter pair is orthonormal, so the total
coefficient energy equals the input energy and the adjoint is an exact
inverse. Subband naming: the first letter is the filter applied along x
(axis 1, within each row), the second the filter applied along y
(axis 0). HL therefore responds to vertical structure, LH to horizontal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

__all__ = [
    "WaveletFilter",
    "SubbandLevel",
    "SubbandSet",
    "DB2",
    "db2_filter",
    "dwt1d",
    "dwt2d_level",
    "dwt2d_multilevel",
    "idwt2d_multilevel",
]


@dataclass(frozen=True)
class WaveletFilter:
    """Orthonormal analysis pair: lowpass sums to sqrt(2), highpass to 0."""

    lowpass: np.ndarray
    highpass: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lowpass, dtype=np.float64)
        hi = np.asarray(self.highpass, dtype=np.float64)
        if lo.shape != (4,) or hi.shape != (4,):
            raise ValueError("expected 4-tap analysis filters")
        object.__setattr__(self, "lowpass", lo)
        object.__setattr__(self, "highpass", hi)


def db2_filter() -> WaveletFilter:
    """Second-order Daubechies analysis pair.

    Lowpass is [(1+v3), (3+v3), (3-v3), (1-v3)] / (4*sqrt(2)) with
    v3 = sqrt(3); the highpass is the alternating-sign flip of it.
    """
    v3 = math.sqrt(3.0)
    scale = 4.0 * math.sqrt(2.0)
    lo = np.array([1.0 + v3, 3.0 + v3, 3.0 - v3, 1.0 - v3]) / scale
    hi = np.array([lo[3], -lo[2], lo[1], -lo[0]])
    return WaveletFilter(lowpass=lo, highpass=hi)


DB2 = db2_filter()


@dataclass(frozen=True)
class SubbandLevel:
    """Detail subbands of one decomposition level."""

    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray


@dataclass(frozen=True)
class SubbandSet:
    """Detail subbands of every level plus the final approximation.

    ``levels[0]`` is the finest scale. ``detail_bands()`` yields the nine
    detail matrices level by level, LH/HL/HH within each level, which is
    the canonical d1..d9 ordering used for the energy features.
    """

    levels: tuple[SubbandLevel, ...]
    ll: np.ndarray

    def detail_bands(self) -> Iterator[np.ndarray]:
        for level in self.levels:
            yield level.lh
            yield level.hl
            yield level.hh

    @property
    def side(self) -> int:
        """Side length of the square input block."""
        return self.levels[0].lh.shape[0] * 2


def _analyze(x: np.ndarray, filt: WaveletFilter, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """One analysis pass along ``axis``: circular correlation + decimation."""
    length = x.shape[axis]
    acc_lo = filt.lowpass[0] * x
    acc_hi = filt.highpass[0] * x
    for k in range(1, 4):
        rolled = np.roll(x, -k, axis=axis)
        acc_lo = acc_lo + filt.lowpass[k] * rolled
        acc_hi = acc_hi + filt.highpass[k] * rolled
    even = [slice(None)] * x.ndim
    even[axis] = slice(0, length, 2)
    even = tuple(even)
    return acc_lo[even], acc_hi[even]


def _synthesize(approx: np.ndarray, detail: np.ndarray, filt: WaveletFilter, axis: int) -> np.ndarray:
    """Adjoint of ``_analyze``; exact inverse for orthonormal filters."""
    shape = list(approx.shape)
    shape[axis] *= 2
    up_a = np.zeros(shape, dtype=np.float64)
    up_d = np.zeros(shape, dtype=np.float64)
    even = [slice(None)] * approx.ndim
    even[axis] = slice(0, shape[axis], 2)
    even = tuple(even)
    up_a[even] = approx
    up_d[even] = detail
    out = np.zeros(shape, dtype=np.float64)
    for k in range(4):
        out += filt.lowpass[k] * np.roll(up_a, k, axis=axis)
        out += filt.highpass[k] * np.roll(up_d, k, axis=axis)
    return out


def dwt1d(signal: np.ndarray, filt: WaveletFilter = DB2) -> tuple[np.ndarray, np.ndarray]:
    """Single-level 1-D transform of an even-length signal.

    Returns (approx, detail), each of half the input length. Energy is
    preserved: ||approx||^2 + ||detail||^2 == ||signal||^2.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D signal, got shape {x.shape}")
    if x.size == 0 or x.size % 2 != 0:
        raise ValueError(f"signal length must be even and positive, got {x.size}")
    return _analyze(x, filt, axis=0)


def dwt2d_level(block: np.ndarray, filt: WaveletFilter = DB2) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """One 2-D level: rows first, then columns.

    Returns (LL, LH, HL, HH), each (N/2, N/2) for an N x N input.
    """
    x = np.asarray(block, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square block, got shape {x.shape}")
    n = x.shape[0]
    if n < 2 or n % 2 != 0:
        raise ValueError(f"block side must be even and positive, got {n}")
    low_x, high_x = _analyze(x, filt, axis=1)
    ll, lh = _analyze(low_x, filt, axis=0)
    hl, hh = _analyze(high_x, filt, axis=0)
    return ll, lh, hl, hh


def dwt2d_multilevel(block: np.ndarray, levels: int = 3, filt: WaveletFilter = DB2) -> SubbandSet:
    """Recursive decomposition of the approximation, ``levels`` deep.

    For levels=3 this produces the nine detail subbands d1..d9 plus the
    final LL, preserving total energy.
    """
    x = np.asarray(block, dtype=np.float64)
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square block, got shape {x.shape}")
    n = x.shape[0]
    if n % (1 << levels) != 0 or n == 0:
        raise ValueError(f"block side {n} is not divisible by 2^{levels}")
    detail_levels = []
    current = x
    for _ in range(levels):
        current, lh, hl, hh = dwt2d_level(current, filt)
        detail_levels.append(SubbandLevel(lh=lh, hl=hl, hh=hh))
    return SubbandSet(levels=tuple(detail_levels), ll=current)


def idwt2d_multilevel(bands: SubbandSet, filt: WaveletFilter = DB2) -> np.ndarray:
    """Reconstruct the original block from a SubbandSet."""
    current = np.asarray(bands.ll, dtype=np.float64)
    if current.ndim != 2 or current.shape[0] != current.shape[1]:
        raise ValueError(f"LL band must be square, got shape {current.shape}")
    for level in reversed(bands.levels):
        side = current.shape[0]
        for name, band in (("lh", level.lh), ("hl", level.hl), ("hh", level.hh)):
            if band.shape != (side, side):
                raise ValueError(
                    f"{name} band has shape {band.shape}, expected {(side, side)}"
                )
        low_x = _synthesize(current, np.asarray(level.lh, dtype=np.float64), filt, axis=0)
        high_x = _synthesize(
            np.asarray(level.hl, dtype=np.float64),
            np.asarray(level.hh, dtype=np.float64),
            filt,
            axis=0,
        )
        current = _synthesize(low_x, high_x, filt, axis=1)
    return current
