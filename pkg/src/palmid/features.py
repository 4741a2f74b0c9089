"""Per-block texture features of a grayscale palm image.

Every image is cut into non-overlapping N x N blocks (N = 16 by
default). Each block yields a 14-entry feature vector:

    f1      mean intensity
    f2..f4  second, third and fourth central moments of the pixel
            distribution
    f5      Shannon entropy of the pixel distribution, in bits
    f6..f14 mean-square energies of the nine detail subbands of a
            three-level transform, ordered level-major LH/HL/HH

Stacking the M block vectors as columns gives the 14 x M feature matrix
of the image; columns follow raster order (left to right, top to
bottom). Pixel values are used raw in 0..255, the classifier's
normalization absorbs scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import feature_matrix_kernel
from .wavelet import dwt2d_multilevel

__all__ = [
    "NUM_FEATURES",
    "DEFAULT_BLOCK",
    "BlockPmf",
    "partition_blocks",
    "block_pmf",
    "statistical_features",
    "wavelet_features",
    "extract_feature_matrix",
]

NUM_FEATURES = 14
DEFAULT_BLOCK = 16


@dataclass(frozen=True)
class BlockPmf:
    """Empirical pixel distribution of one block.

    ``values`` holds the distinct intensities present (ascending),
    ``probs`` their relative frequencies; probabilities are positive and
    sum to one.
    """

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        if self.values.size == 0:
            raise ValueError("empty distribution")
        if np.any(self.probs <= 0.0):
            raise ValueError("probabilities must be positive")

    @property
    def num_values(self) -> int:
        return int(self.values.size)


def _as_gray(image: np.ndarray) -> np.ndarray:
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError(f"expected 8-bit intensities, got dtype {arr.dtype}")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("intensities must lie in 0..255")
        arr = arr.astype(np.uint8)
    return arr


def partition_blocks(image: np.ndarray, block: int = DEFAULT_BLOCK) -> list[np.ndarray]:
    """Split an image into N x N blocks in raster order.

    Dimensions must be exact multiples of the block side; images are
    never padded.
    """
    arr = _as_gray(image)
    height, width = arr.shape
    if block <= 0:
        raise ValueError("block side must be positive")
    if height % block != 0 or width % block != 0:
        raise ValueError(
            f"image of {width}x{height} is not divisible into {block}x{block} blocks"
        )
    return [
        arr[y : y + block, x : x + block]
        for y in range(0, height, block)
        for x in range(0, width, block)
    ]


def block_pmf(block: np.ndarray) -> BlockPmf:
    """Empirical distribution of the pixel intensities in a block."""
    arr = _as_gray(block)
    if arr.size == 0:
        raise ValueError("empty block")
    values, counts = np.unique(arr, return_counts=True)
    return BlockPmf(values=values, probs=counts / arr.size)


def statistical_features(pmf: BlockPmf) -> np.ndarray:
    """f1..f5: mean, three central moments, and entropy in bits."""
    v = pmf.values.astype(np.float64)
    p = pmf.probs
    mean = float(p @ v)
    centered = v - mean
    csq = centered * centered
    m2 = float(p @ csq)
    m3 = float(p @ (csq * centered))
    m4 = float(p @ (csq * csq))
    entropy = float(-(p @ np.log2(p)))
    return np.array([mean, m2, m3, m4, entropy])


def wavelet_features(block: np.ndarray) -> np.ndarray:
    """f6..f14: mean-square energy of each detail subband d1..d9."""
    arr = _as_gray(block).astype(np.float64)
    bands = dwt2d_multilevel(arr, levels=3)
    return np.array([float(np.mean(band * band)) for band in bands.detail_bands()])


def extract_feature_matrix(image: np.ndarray, block: int = DEFAULT_BLOCK) -> np.ndarray:
    """14 x M feature matrix of an image, one column per block.

    Dispatches to the selected kernel backend; both backends implement
    the per-block definitions above.
    """
    arr = _as_gray(image)
    if block < 8 or block % 8 != 0:
        raise ValueError("block side must be a positive multiple of 8")
    height, width = arr.shape
    if height % block != 0 or width % block != 0:
        raise ValueError(
            f"image of {width}x{height} is not divisible into {block}x{block} blocks"
        )
    return feature_matrix_kernel(np.ascontiguousarray(arr), block)
