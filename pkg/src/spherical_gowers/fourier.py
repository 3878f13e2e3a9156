"""Discrete Fourier transform on F_p^d.

f^(xi) = E_x f(x) e(-xi.x / p), computed axis by axis with a p x p
character table, so the cost is d p^(d+1) multiplies.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def character_table(p: int, sign: int = -1) -> np.ndarray:
    k = np.arange(p)
    W = np.exp(sign * 2j * np.pi * (np.outer(k, k) % p) / p)
    W.setflags(write=False)
    return W


def _transform(values, p, d, sign, scale):
    a = np.asarray(values, dtype=np.complex128)
    extra = a.shape[1:]
    if a.shape[0] != p ** d:
        raise ValueError(f"expected {p**d} values, got {a.shape[0]}")
    t = a.reshape((p,) * d + extra)
    W = character_table(p, sign)
    for axis in range(d):
        t = np.moveaxis(np.tensordot(W, t, axes=([1], [axis])), 0, axis)
    out = t.reshape(a.shape)
    return out * scale if scale != 1 else out


def dft(values, p: int, d: int) -> np.ndarray:
    """Normalized forward transform; the leading axis indexes F_p^d."""
    return _transform(values, p, d, -1, float(p) ** (-d))


def idft(coeffs, p: int, d: int) -> np.ndarray:
    """Inverse of :func:`dft`: f(x) = sum_xi f^(xi) e(xi.x / p)."""
    return _transform(coeffs, p, d, 1, 1)


def naive_dft(values, p: int, d: int) -> np.ndarray:
    """O(p^(2d)) reference transform."""
    from .grid import grid_points

    pts = grid_points(p, d)
    phase = np.exp(-2j * np.pi * ((pts @ pts.T) % p) / p)
    a = np.asarray(values, dtype=np.complex128)
    return np.tensordot(phase, a, axes=([1], [0])) / p ** d


def self_convolution_counts(mask, p: int, d: int) -> np.ndarray:
    """r(x) = #{(a, b) in S^2 : a + b = x} as exact integers."""
    m = np.asarray(mask, dtype=np.float64)
    r = idft(dft(m, p, d) ** 2, p, d).real * p ** d
    out = np.rint(r)
    if np.max(np.abs(r - out), initial=0.0) > 1e-3:
        raise ArithmeticError("convolution counts are not integral to working precision")
    return out.astype(np.int64)
