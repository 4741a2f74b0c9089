"""NumPy fallback for the per-block feature kernel.

Processes every block of an image as one batch: histogram statistics via
a flat bincount, then three batched transform levels using the same
circular-correlation convention as :mod:`palmid.wavelet`.
"""

from __future__ import annotations

import numpy as np

from .wavelet import DB2

_INTENSITIES = np.arange(256, dtype=np.float64)


def _batch_analyze(x: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    acc_lo = DB2.lowpass[0] * x
    acc_hi = DB2.highpass[0] * x
    for k in range(1, 4):
        rolled = np.roll(x, -k, axis=axis)
        acc_lo = acc_lo + DB2.lowpass[k] * rolled
        acc_hi = acc_hi + DB2.highpass[k] * rolled
    even = [slice(None)] * x.ndim
    even[axis] = slice(0, x.shape[axis], 2)
    even = tuple(even)
    return acc_lo[even], acc_hi[even]


def feature_matrix(image: np.ndarray, block: int) -> np.ndarray:
    """14 x M feature matrix of a uint8 image; columns in raster block order."""
    height, width = image.shape
    rows = height // block
    cols = width // block
    m = rows * cols
    blocks = (
        image.reshape(rows, block, cols, block).swapaxes(1, 2).reshape(m, block, block)
    )
    pixels = blocks.reshape(m, block * block)
    area = float(block * block)

    # Per-block 256-bin histograms in one bincount over offset intensities.
    offsets = pixels.astype(np.int64) + (np.arange(m, dtype=np.int64)[:, None] << 8)
    counts = np.bincount(offsets.ravel(), minlength=m * 256).reshape(m, 256)
    p = counts / area

    mean = p @ _INTENSITIES
    centered = _INTENSITIES[None, :] - mean[:, None]
    csq = centered * centered
    m2 = np.einsum("ij,ij->i", p, csq)
    m3 = np.einsum("ij,ij->i", p, csq * centered)
    m4 = np.einsum("ij,ij->i", p, csq * csq)
    safe = np.where(p > 0.0, p, 1.0)
    entropy = -np.einsum("ij,ij->i", p, np.log2(safe))

    out = np.empty((14, m), dtype=np.float64)
    out[0] = mean
    out[1] = m2
    out[2] = m3
    out[3] = m4
    out[4] = entropy

    work = blocks.astype(np.float64)
    row = 5
    for _ in range(3):
        low_x, high_x = _batch_analyze(work, axis=2)
        ll, lh = _batch_analyze(low_x, axis=1)
        hl, hh = _batch_analyze(high_x, axis=1)
        out[row] = np.mean(lh * lh, axis=(1, 2))
        out[row + 1] = np.mean(hl * hl, axis=(1, 2))
        out[row + 2] = np.mean(hh * hh, axis=(1, 2))
        row += 3
        work = ll
    return out
