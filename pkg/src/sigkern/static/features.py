"""Finite-dimensional feature maps approximating (or factorizing) static kernels.

Three kinds:

* ``rff``: random Fourier features for the Gaussian kernel,
  ``phi(x) = (1/sqrt(D)) (cos(W^T x), sin(W^T x))`` with ``W ~ N(0, I/bw^2)``,
  output dimension 2D.
* ``rff1d``: the phase-shift variant ``sqrt(2/D) cos(W^T x + b)`` with
  ``b ~ U[0, 2pi)``, output dimension D (one scalar per frequency).
* ``nystroem``: data-dependent factorization of an arbitrary base kernel from
  D landmark rows, whitened by the landmark Gram's eigendecomposition.

In every case ``E <phi(x), phi(y)> = k(x, y)`` (exactly for nystroem on the
landmark span).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..rng import SeedStream
from .kernels import StaticKernelSpec, gram

__all__ = [
    "StaticFeatureSpec",
    "StaticFeatureState",
    "fit_static_features",
    "transform_static_features",
]

FEATURE_KINDS = ("rff", "rff1d", "nystroem")

# eigenvalues at or below this are treated as numerically zero when whitening
EIGENVALUE_FLOOR = 1e-12


@dataclass(frozen=True)
class StaticFeatureSpec:
    kind: str = "rff"
    n_components: int = 100
    bandwidth: float = 1.0
    base_kernel: StaticKernelSpec = field(default_factory=StaticKernelSpec)

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}; choose from {FEATURE_KINDS}")
        if not (isinstance(self.n_components, (int, np.integer)) and self.n_components >= 1):
            raise ValueError(f"n_components must be a positive integer, got {self.n_components}")
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")


@dataclass
class StaticFeatureState:
    """Frozen randomness/landmarks of a fitted feature map."""

    spec: StaticFeatureSpec
    input_dim: int
    out_dim: int
    weights: np.ndarray = None  # type: ignore[assignment]  # (d, D) frequencies
    phases: np.ndarray = None  # type: ignore[assignment]  # (D,) rff1d offsets
    landmarks: np.ndarray = None  # type: ignore[assignment]  # (D, d) nystroem rows
    whiten: np.ndarray = None  # type: ignore[assignment]  # (D, out_dim)


def fit_static_features(spec: StaticFeatureSpec, train, seed: SeedStream) -> StaticFeatureState:
    """Sample the map's randomness (or pick landmarks) and freeze it.

    `train` is a (n, d) row-vector set; the rff kinds only consume its
    dimension, nystroem draws D landmark rows from it without replacement
    (requiring n >= D).
    """
    train = np.atleast_2d(np.asarray(train, dtype=np.float64))
    d = train.shape[1]
    D = spec.n_components
    rng = seed.generator()
    if spec.kind == "rff":
        W = rng.standard_normal((d, D)) / spec.bandwidth
        return StaticFeatureState(spec, d, 2 * D, weights=W)
    if spec.kind == "rff1d":
        W = rng.standard_normal((d, D)) / spec.bandwidth
        b = rng.uniform(0.0, 2.0 * math.pi, D)
        return StaticFeatureState(spec, d, D, weights=W, phases=b)
    # nystroem
    n = train.shape[0]
    if n < D:
        raise ValueError(f"nystroem needs at least n_components={D} training vectors, got {n}")
    idx = rng.choice(n, size=D, replace=False)
    Z = train[np.sort(idx)]
    K = gram(spec.base_kernel, Z)
    evals, evecs = np.linalg.eigh(K)
    keep = evals > EIGENVALUE_FLOOR
    evals = evals[keep]
    evecs = evecs[:, keep]
    whiten = evecs / np.sqrt(evals)
    return StaticFeatureState(spec, d, int(evals.shape[0]), landmarks=Z, whiten=whiten)


def transform_static_features(state: StaticFeatureState, X, counters=None) -> np.ndarray:
    """Map rows of X (..., d) to feature space (..., out_dim)."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != state.input_dim:
        raise ValueError(f"dimension mismatch: fitted on d={state.input_dim}, got d={X.shape[-1]}")
    spec = state.spec
    D = spec.n_components
    if spec.kind == "rff":
        P = X @ state.weights
        if counters is not None:
            counters.add_flops(P.size * state.input_dim + 2 * P.size)
        scale = 1.0 / math.sqrt(D)
        return np.concatenate([scale * np.cos(P), scale * np.sin(P)], axis=-1)
    if spec.kind == "rff1d":
        P = X @ state.weights + state.phases
        if counters is not None:
            counters.add_flops(P.size * state.input_dim + P.size)
        return math.sqrt(2.0 / D) * np.cos(P)
    lead = X.shape[:-1]
    K = gram(spec.base_kernel, X.reshape(-1, state.input_dim), state.landmarks)
    if counters is not None:
        counters.add_flops(K.size * (state.input_dim + state.out_dim))
    return (K @ state.whiten).reshape(*lead, state.out_dim)
