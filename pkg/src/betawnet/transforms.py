"""Radix-2 FFT and orthonormal DCT-II used by the feature front end.

Kept in-house so the spectral path has no dependencies beyond numpy and a
direct O(n^2) DFT can serve as an independent test oracle.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["fft", "rfft_magnitude", "dct_matrix", "next_pow2"]


def next_pow2(n: int) -> int:
    """Smallest power of two >= n (n >= 1)."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return 1 << (n - 1).bit_length()


def _bit_reverse_indices(n: int) -> np.ndarray:
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    bits = n.bit_length() - 1
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def fft(x) -> np.ndarray:
    """Iterative radix-2 Cooley-Tukey FFT along the last axis.

    The length of the last axis must be a power of two.  Accepts real or
    complex input; returns complex128.
    """
    data = np.asarray(x)
    n = data.shape[-1]
    if n == 0 or n & (n - 1):
        raise ValueError(f"FFT length must be a power of two, got {n}")
    out = data.astype(np.complex128, copy=True)
    if n == 1:
        return out

    out = out[..., _bit_reverse_indices(n)]
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp(-2j * math.pi * np.arange(half) / size)
        blocks = out.reshape(out.shape[:-1] + (n // size, size))
        even = blocks[..., :half].copy()
        odd = blocks[..., half:] * tw
        blocks[..., :half] = even + odd
        blocks[..., half:] = even - odd
        size *= 2
    return out


def rfft_magnitude(x, n_fft: int) -> np.ndarray:
    """Magnitude spectrum bins 0..n_fft//2 of a real signal, zero-padded
    (or truncated) to n_fft along the last axis."""
    data = np.asarray(x, dtype=float)
    m = data.shape[-1]
    if m < n_fft:
        pad = [(0, 0)] * (data.ndim - 1) + [(0, n_fft - m)]
        data = np.pad(data, pad)
    elif m > n_fft:
        data = data[..., :n_fft]
    return np.abs(fft(data)[..., : n_fft // 2 + 1])


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II matrix D with shape (n, n).

    Coefficients of a vector v are D @ v; orthonormality makes D.T the
    exact inverse.
    """
    k = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    d = np.cos(math.pi * k * (2 * m + 1) / (2 * n)) * math.sqrt(2.0 / n)
    d[0] *= math.sqrt(0.5)
    return d
