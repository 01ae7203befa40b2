"""Hand-rolled radix-2 FFT and circular convolution.

The iterative Cooley-Tukey transform below is the only FFT in the package
(no FFT library is used). Lengths that are not powers of two take the direct
O(Q^2) convolution path instead.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["is_pow2", "fft_pow2", "ifft_pow2", "circular_convolve"]

_REV_CACHE: dict[int, np.ndarray] = {}


def is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _bit_reversal(n: int) -> np.ndarray:
    perm = _REV_CACHE.get(n)
    if perm is None:
        bits = n.bit_length() - 1
        idx = np.arange(n, dtype=np.int64)
        perm = np.zeros(n, dtype=np.int64)
        for _ in range(bits):
            perm = (perm << 1) | (idx & 1)
            idx >>= 1
        _REV_CACHE[n] = perm
    return perm


def fft_pow2(a, inverse: bool = False) -> np.ndarray:
    """Radix-2 iterative Cooley-Tukey FFT along the last axis.

    The length must be a power of two. `inverse=True` applies the inverse
    transform including the 1/n scaling.
    """
    a = np.asarray(a)
    n = a.shape[-1]
    if not is_pow2(n):
        raise ValueError(f"fft length must be a power of two, got {n}")
    out = np.ascontiguousarray(a[..., _bit_reversal(n)], dtype=np.complex128)
    sign = 1.0 if inverse else -1.0
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp((sign * 2j * math.pi / size) * np.arange(half))
        view = out.reshape(out.shape[:-1] + (n // size, size))
        even = view[..., :half].copy()
        odd = view[..., half:] * twiddle
        view[..., :half] = even + odd
        view[..., half:] = even - odd
        size *= 2
    if inverse:
        out /= n
    return out


def ifft_pow2(a) -> np.ndarray:
    return fft_pow2(a, inverse=True)


def _convolve_direct(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    n = u.shape[-1]
    # circulant gather: out_k = sum_j u_j * v_{(k-j) mod n}
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return np.einsum("...j,...jk->...k", u, v[..., idx])


def circular_convolve(u, v) -> np.ndarray:
    """Circular convolution along the last axis (equal lengths).

    Power-of-two lengths run through the radix-2 FFT; anything else falls
    back to the direct quadratic formula. Real inputs give real output.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape[-1] != v.shape[-1]:
        raise ValueError(f"length mismatch: {u.shape[-1]} vs {v.shape[-1]}")
    n = u.shape[-1]
    if n == 0:
        raise ValueError("vectors must be non-empty")
    if is_pow2(n):
        return ifft_pow2(fft_pow2(u) * fft_pow2(v)).real
    return _convolve_direct(u, v)
