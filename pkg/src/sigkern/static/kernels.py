"""Static (pointwise) kernels on R^d and the median bandwidth heuristic.

These are the base kernels lifted to sequence space by the signature
machinery. All evaluation paths are vectorized; `gram` mirrors the upper
triangle for symmetric inputs so Gram matrices are bitwise symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "StaticKernelSpec",
    "KERNEL_KINDS",
    "kernel_eval",
    "gram",
    "gram_diag",
    "rowwise",
    "median_heuristic",
]

KERNEL_KINDS = (
    "linear",
    "polynomial",
    "rbf",
    "matern12",
    "matern32",
    "matern52",
    "rational_quadratic",
)

_SQRT3 = math.sqrt(3.0)
_SQRT5 = math.sqrt(5.0)


@dataclass(frozen=True)
class StaticKernelSpec:
    """Which kernel and its parameters.

    scale multiplies the inner product (linear/polynomial); degree and gamma
    shape the polynomial; bandwidth is the length scale of the stationary
    kernels; alpha is the rational-quadratic shape.
    """

    kind: str = "rbf"
    scale: float = 1.0
    degree: int = 3
    gamma: float = 1.0
    bandwidth: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; choose from {KERNEL_KINDS}")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if not (isinstance(self.degree, (int, np.integer)) and self.degree >= 1):
            raise ValueError(f"degree must be a positive integer, got {self.degree}")
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")


def _from_inner(spec: StaticKernelSpec, inner: np.ndarray) -> np.ndarray:
    if spec.kind == "linear":
        return spec.scale * inner
    return (spec.scale * inner + spec.gamma) ** spec.degree


def _from_sqdist(spec: StaticKernelSpec, sq: np.ndarray) -> np.ndarray:
    bw2 = spec.bandwidth * spec.bandwidth
    if spec.kind == "rbf":
        return np.exp(sq / (-2.0 * bw2))
    if spec.kind == "rational_quadratic":
        return (1.0 + sq / (2.0 * spec.alpha * bw2)) ** (-spec.alpha)
    r = np.sqrt(sq) / spec.bandwidth
    if spec.kind == "matern12":
        return np.exp(-r)
    if spec.kind == "matern32":
        sr = _SQRT3 * r
        return (1.0 + sr) * np.exp(-sr)
    if spec.kind == "matern52":
        sr = _SQRT5 * r
        return (1.0 + sr + (5.0 / 3.0) * r * r) * np.exp(-sr)
    raise AssertionError(spec.kind)


def _is_dot_kind(kind: str) -> bool:
    return kind in ("linear", "polynomial")


def kernel_eval(spec: StaticKernelSpec, x, y) -> float:
    """k(x, y) for two vectors. Touches O(d) memory."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if _is_dot_kind(spec.kind):
        return float(_from_inner(spec, np.dot(x, y)))
    w = x - y
    return float(_from_sqdist(spec, np.dot(w, w)))


def _pairwise_sqdist(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    # ||x||^2 + ||y||^2 - 2<x,y>, clamped against tiny negative round-off
    xx = np.einsum("...i,...i->...", X, X)
    yy = np.einsum("...i,...i->...", Y, Y)
    sq = xx[..., :, None] + yy[..., None, :] - 2.0 * (X @ np.swapaxes(Y, -1, -2))
    np.maximum(sq, 0.0, out=sq)
    return sq


def gram(spec: StaticKernelSpec, X, Y=None, counters=None) -> np.ndarray:
    """All-pairs kernel matrix for row-vector sets X (n,d) and Y (m,d).

    With Y omitted the result is G(X, X) made bitwise symmetric by mirroring
    the upper triangle.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    symmetric = Y is None
    Y = X if symmetric else np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[-1] != Y.shape[-1]:
        raise ValueError(f"dimension mismatch: d={X.shape[-1]} vs d={Y.shape[-1]}")
    if counters is not None:
        counters.add_flops(X.shape[0] * Y.shape[0] * X.shape[-1])
    if _is_dot_kind(spec.kind):
        K = _from_inner(spec, X @ Y.T)
    else:
        sq = _pairwise_sqdist(X, Y)
        if symmetric:
            # self-distances are exactly zero; the cancellation residue of
            # ||x||^2 + ||x||^2 - 2<x,x> would be amplified by sqrt()
            np.fill_diagonal(sq, 0.0)
        K = _from_sqdist(spec, sq)
    if symmetric:
        upper = np.triu(K)
        K = upper + np.triu(K, 1).T
    return K


def gram_diag(spec: StaticKernelSpec, X) -> np.ndarray:
    """k(x_i, x_i) for each row, computed directly (no n^2 work)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if _is_dot_kind(spec.kind):
        return _from_inner(spec, np.einsum("ij,ij->i", X, X))
    return _from_sqdist(spec, np.zeros(X.shape[0]))


def rowwise(spec: StaticKernelSpec, X, Y) -> np.ndarray:
    """k(x_i, y_i) row by row; X and Y must have matching shapes (..., d)."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape != Y.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {Y.shape}")
    if _is_dot_kind(spec.kind):
        return _from_inner(spec, np.einsum("...i,...i->...", X, Y))
    W = X - Y
    return _from_sqdist(spec, np.einsum("...i,...i->...", W, W))


def median_heuristic(X, max_pairs: int = 1_000_000) -> float:
    """Median pairwise Euclidean distance over a deterministic subsample.

    When the full pair count exceeds max_pairs, an evenly spaced subset of
    rows whose pair count fits the budget is used instead. A zero median
    (all subsampled points equal) falls back to 1.0.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = X.shape[0]
    if n < 2:
        raise ValueError(f"median_heuristic needs at least 2 vectors, got {n}")
    if max_pairs < 1:
        raise ValueError(f"max_pairs must be positive, got {max_pairs}")
    if n * (n - 1) // 2 > max_pairs:
        m = int((1.0 + math.sqrt(1.0 + 8.0 * max_pairs)) / 2.0)
        m = max(2, min(n, m))
        idx = np.unique((np.arange(m, dtype=np.int64) * n) // m)
        X = X[idx]
        n = X.shape[0]
    sq = _pairwise_sqdist(X, X)
    dists = np.sqrt(sq[np.triu_indices(n, k=1)])
    med = float(np.median(dists))
    return med if med > 0.0 else 1.0
