# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-block feature kernel: histogram statistics plus a
three-level transform with the same taps and circular-correlation
convention as palmid.wavelet, all in straight C loops."""

import numpy as np

from libc.math cimport log2, sqrt


cdef double LO[4]
cdef double HI[4]

cdef void _init_taps():
    cdef double v3 = sqrt(3.0)
    cdef double scale = 4.0 * sqrt(2.0)
    LO[0] = (1.0 + v3) / scale
    LO[1] = (3.0 + v3) / scale
    LO[2] = (3.0 - v3) / scale
    LO[3] = (1.0 - v3) / scale
    HI[0] = LO[3]
    HI[1] = -LO[2]
    HI[2] = LO[1]
    HI[3] = -LO[0]

_init_taps()


cdef void _dwt_level(double[:, ::1] cur, double[:, ::1] tmp, int n,
                     double* e_lh, double* e_hl, double* e_hh) noexcept nogil:
    """One level on the top-left n x n region of ``cur``: rows into ``tmp``,
    columns back into ``cur``. Quadrant layout afterwards (x filter first):
    LL top-left, HL top-right, LH bottom-left, HH bottom-right."""
    cdef int h = n // 2
    cdef int r, c, i, k, idx
    cdef double alo, ahi
    for r in range(n):
        for i in range(h):
            alo = 0.0
            ahi = 0.0
            for k in range(4):
                idx = (2 * i + k) % n
                alo += LO[k] * cur[r, idx]
                ahi += HI[k] * cur[r, idx]
            tmp[r, i] = alo
            tmp[r, h + i] = ahi
    for c in range(n):
        for i in range(h):
            alo = 0.0
            ahi = 0.0
            for k in range(4):
                idx = (2 * i + k) % n
                alo += LO[k] * tmp[idx, c]
                ahi += HI[k] * tmp[idx, c]
            cur[i, c] = alo
            cur[h + i, c] = ahi
    e_lh[0] = 0.0
    e_hl[0] = 0.0
    e_hh[0] = 0.0
    for r in range(h):
        for c in range(h):
            e_lh[0] += cur[h + r, c] * cur[h + r, c]
            e_hl[0] += cur[r, h + c] * cur[r, h + c]
            e_hh[0] += cur[h + r, h + c] * cur[h + r, h + c]


def feature_matrix(const unsigned char[:, ::1] image, int block):
    """14 x M feature matrix of a uint8 image; columns in raster block order."""
    cdef int height = image.shape[0]
    cdef int width = image.shape[1]
    if block < 8 or block % 8 != 0:
        raise ValueError("block side must be a positive multiple of 8")
    if height % block != 0 or width % block != 0:
        raise ValueError("image dimensions must be divisible by the block side")
    cdef int rows = height // block
    cdef int cols = width // block
    cdef int m = rows * cols

    out = np.empty((14, m), dtype=np.float64)
    cur_arr = np.empty((block, block), dtype=np.float64)
    tmp_arr = np.empty((block, block), dtype=np.float64)
    cdef double[:, ::1] F = out
    cdef double[:, ::1] cur = cur_arr
    cdef double[:, ::1] tmp = tmp_arr

    cdef long hist[256]
    cdef double area = <double>(block * block)
    cdef int br, bc, y, x, v, col, n, level
    cdef double mean, m2, m3, m4, entropy, p, d, d2
    cdef double e_lh, e_hl, e_hh, sub_area

    for br in range(rows):
        for bc in range(cols):
            col = br * cols + bc
            for v in range(256):
                hist[v] = 0
            for y in range(block):
                for x in range(block):
                    v = image[br * block + y, bc * block + x]
                    hist[v] += 1
                    cur[y, x] = <double>v

            mean = 0.0
            for v in range(256):
                if hist[v] > 0:
                    mean += hist[v] * <double>v
            mean /= area
            m2 = 0.0
            m3 = 0.0
            m4 = 0.0
            entropy = 0.0
            for v in range(256):
                if hist[v] > 0:
                    p = hist[v] / area
                    d = <double>v - mean
                    d2 = d * d
                    m2 += p * d2
                    m3 += p * d2 * d
                    m4 += p * d2 * d2
                    entropy -= p * log2(p)
            F[0, col] = mean
            F[1, col] = m2
            F[2, col] = m3
            F[3, col] = m4
            F[4, col] = entropy

            n = block
            for level in range(3):
                _dwt_level(cur, tmp, n, &e_lh, &e_hl, &e_hh)
                sub_area = <double>((n // 2) * (n // 2))
                F[5 + 3 * level, col] = e_lh / sub_area
                F[6 + 3 * level, col] = e_hl / sub_area
                F[7 + 3 * level, col] = e_hh / sub_area
                n //= 2
    return out
