"""Random (primal) signature feature maps.

Five variants share one time-streaming recursion. Writing Z_a[k] for the
k-th increment of the level-a static feature lift of a sequence (each level
owns an independently sampled static map), the level arrays evolve as

    A_m[k] = A_m[k-1] + sum_{q=1..min(p,m)} (1/q!) *
             (A_{m-q}[k-1] o Z_{m-q+1}[k] o ... o Z_m[k])

where ``o`` is the variant's product: full outer product (``rfsf_full``),
per-copy outer product on D independent width-1 copies (``dp``), plain
per-copy scalar product (``dp1d``), Hadamard product after a slot-wise
random projection (``trp``), or circular convolution of slot-wise count
sketches (``ts``, run in the frequency domain for power-of-two Q). Levels
are updated in descending order so every right-hand side still holds the
previous step's value; the time axis is never materialized, so arbitrarily
wide level blocks stream in O(width) memory and O(L) flops.

After the sweep, level m of a batch is an (N, F_m) block; widths are
(2D)^m, 2^m D, D, Q, Q respectively, plus a constant ones column at level 0
so that inner products of concatenated blocks estimate the full truncated
signature kernel including its constant level. In expectation over the fit
seed, <Phi_m(x), Phi_m(y)> equals the exact level kernel k_m(x, y); for
``rfsf_full`` the identity is exact per seed with the static kernel replaced
by the finite-rank lift <phi_a(.), phi_a(.)>, which
:func:`rfsf_exact_gram` exploits to evaluate Gram matrices whose
materialized width would be astronomically large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fftconv import circular_convolve, fft_pow2, ifft_pow2, is_pow2
from .kernels import sig_levels_dp, _normalize_levelwise
from .projections import ProjectionSpec, ProjectionState, fit_projection, slot_matvec
from .rng import SeedStream
from .sequences import SequenceBatch
from .static.features import StaticFeatureSpec, StaticFeatureState, fit_static_features, transform_static_features
from .utils import ResourceCounters, run_tasks

__all__ = [
    "SigFeatureConfig",
    "SigFeatureState",
    "LevelBlocks",
    "VARIANTS",
    "fit_sig_features",
    "transform_sig_features",
    "normalize_levels",
    "sig_feature_gram",
    "rfsf_exact_gram",
]

VARIANTS = ("rfsf_full", "dp", "dp1d", "trp", "ts")

_SEQ_BLOCK = 64  # sequences per worker task; fixed so outputs ignore thread count


@dataclass(frozen=True)
class SigFeatureConfig:
    """Variant, static feature family and sizes of a signature feature map.

    n_components is the static sample size D (the fitted static maps use it,
    overriding static.n_components); projection is the target dimension Q of
    the trp/ts variants. order and difference mean the same as in
    KernelConfig; normalize requests level-normalized output downstream.
    """

    variant: str = "trp"
    static: StaticFeatureSpec = field(default_factory=StaticFeatureSpec)
    n_components: int = 100
    projection: int = 100
    n_levels: int = 5
    order: int | None = 1
    difference: bool = True
    normalize: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if not (isinstance(self.n_components, (int, np.integer)) and self.n_components >= 1):
            raise ValueError(f"n_components must be a positive integer, got {self.n_components}")
        if not (isinstance(self.projection, (int, np.integer)) and self.projection >= 1):
            raise ValueError(f"projection must be a positive integer, got {self.projection}")
        if not (isinstance(self.n_levels, (int, np.integer)) and self.n_levels >= 0):
            raise ValueError(f"n_levels must be a non-negative integer, got {self.n_levels}")
        if self.order is not None and not (
                isinstance(self.order, (int, np.integer)) and self.order >= 1):
            raise ValueError(f"order must be a positive integer or None, got {self.order}")
        allowed = {
            "rfsf_full": ("rff", "nystroem"),
            "trp": ("rff",),
            "ts": ("rff",),
            "dp": ("rff",),
            "dp1d": ("rff1d",),
        }[self.variant]
        if self.static.kind not in allowed:
            raise ValueError(
                f"variant {self.variant!r} requires a static feature kind in {allowed}, "
                f"got {self.static.kind!r}")

    @property
    def effective_order(self) -> int:
        if self.n_levels == 0:
            return 1
        if self.order is None:
            return self.n_levels
        return min(int(self.order), self.n_levels)


@dataclass
class SigFeatureState:
    """Frozen randomness of a fitted signature feature map."""

    config: SigFeatureConfig
    input_dim: int
    slot_states: list  # M static-feature states, one per level position
    proj_states: list | None  # M single-slot projection states (trp/ts)
    level_dims: list  # F_0..F_M


@dataclass
class LevelBlocks:
    """Per-level feature blocks B_0..B_M; B_m is (N, F_m), B_0 a ones column."""

    blocks: list

    @property
    def n(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def n_levels(self) -> int:
        return len(self.blocks) - 1

    @property
    def widths(self) -> list:
        return [b.shape[1] for b in self.blocks]

    def concat(self) -> np.ndarray:
        return np.concatenate(self.blocks, axis=1)

    @classmethod
    def split(cls, matrix: np.ndarray, widths) -> "LevelBlocks":
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape[1] != sum(widths):
            raise ValueError(f"matrix width {matrix.shape[1]} != sum of block widths {sum(widths)}")
        edges = np.cumsum([0] + list(widths))
        return cls([matrix[:, edges[i]:edges[i + 1]] for i in range(len(widths))])


def _level_width(cfg: SigFeatureConfig, slot_dims, m: int) -> int:
    if m == 0:
        return 1
    if cfg.variant == "rfsf_full":
        w = 1
        for a in range(m):
            w *= slot_dims[a]
        return w
    if cfg.variant == "dp":
        return (2 ** m) * cfg.n_components
    if cfg.variant == "dp1d":
        return cfg.n_components
    return cfg.projection


def fit_sig_features(cfg: SigFeatureConfig, train, seed: SeedStream) -> SigFeatureState:
    """Sample M independent static maps (and projection slots) from train data."""
    if isinstance(train, SequenceBatch):
        pts = train.points()
    else:
        arr = np.asarray(train, dtype=np.float64)
        pts = arr.reshape(-1, arr.shape[-1])
    d = pts.shape[1]
    static_spec = replace(cfg.static, n_components=cfg.n_components)
    M = cfg.n_levels
    slot_states = [
        fit_static_features(static_spec, pts, seed.child(f"level{a}"))
        for a in range(1, M + 1)
    ]
    proj_states = None
    if cfg.variant in ("trp", "ts"):
        kind = "trp" if cfg.variant == "trp" else "tensor_sketch"
        proj_states = [
            fit_projection(ProjectionSpec(kind=kind, n_components=cfg.projection),
                           slot_states[a].out_dim, seed.child(f"proj{a + 1}"))
            for a in range(M)
        ]
    slot_dims = [s.out_dim for s in slot_states]
    level_dims = [_level_width(cfg, slot_dims, m) for m in range(M + 1)]
    return SigFeatureState(cfg, d, slot_states, proj_states, level_dims)


def _lift_increments(state: SigFeatureState, X: np.ndarray, counters) -> list:
    """Per-slot increment arrays Z_a of one batch block.

    Shapes: rfsf_full/trp/ts (n, T, w_a); dp (n, T, D, 2); dp1d (n, T, D).
    """
    cfg = state.config
    out = []
    for st in state.slot_states:
        if cfg.variant == "dp":
            P = X @ st.weights
            counters.add_flops(P.size * state.input_dim + 2 * P.size)
            U = np.stack([np.cos(P), np.sin(P)], axis=-1)
        elif cfg.variant == "dp1d":
            P = X @ st.weights + st.phases
            counters.add_flops(P.size * state.input_dim + P.size)
            U = math.sqrt(2.0) * np.cos(P)
        else:
            U = transform_static_features(st, X, counters=counters)
        Z = (U[:, 1:] - U[:, :-1]) if cfg.difference else U
        out.append(Z)
    return out


def _slot_arrays(state: SigFeatureState, Z: list, counters) -> tuple:
    """Project/sketch the slot increments; returns (V, fourier) where V[a]
    is what the recursion consumes at slot a+1."""
    cfg = state.config
    if cfg.variant == "trp":
        V = []
        for a, Za in enumerate(Z):
            V.append(slot_matvec(state.proj_states[a], Za, 0))
            counters.add_flops(Za.size * cfg.projection)
        return V, False
    if cfg.variant == "ts":
        fourier = is_pow2(cfg.projection)
        V = []
        for a, Za in enumerate(Z):
            S = slot_matvec(state.proj_states[a], Za, 0)
            counters.add_flops(Za.size * cfg.projection)
            if fourier:
                S = fft_pow2(S)
                counters.add_flops(S.size * max(int(math.log2(cfg.projection)), 1))
            V.append(S)
        return V, fourier
    return Z, False


def _combine(cfg: SigFeatureConfig, fourier: bool, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    v = cfg.variant
    if v == "rfsf_full":
        n = a.shape[0]
        return (a[:, :, None] * b[:, None, :]).reshape(n, a.shape[1] * b.shape[1])
    if v == "dp":
        n, D = a.shape[0], a.shape[1]
        return (a[..., :, None] * b[..., None, :]).reshape(n, D, a.shape[-1] * b.shape[-1])
    if v == "ts" and not fourier:
        return circular_convolve(a, b)
    return a * b  # dp1d, trp, ts-frequency-domain


def _init_levels(state: SigFeatureState, n: int, fourier: bool) -> list:
    cfg = state.config
    M = cfg.n_levels
    v = cfg.variant
    if v == "rfsf_full":
        A = [np.ones((n, 1))]
        for m in range(1, M + 1):
            A.append(np.zeros((n, state.level_dims[m])))
        return A
    if v == "dp":
        D = cfg.n_components
        return [np.ones((n, D, 1))] + [np.zeros((n, D, 2 ** m)) for m in range(1, M + 1)]
    if v == "dp1d":
        D = cfg.n_components
        return [np.ones((n, D))] + [np.zeros((n, D)) for _ in range(M)]
    Q = cfg.projection
    if v == "ts":
        if fourier:
            return [np.ones((n, Q), dtype=np.complex128)] + [
                np.zeros((n, Q), dtype=np.complex128) for _ in range(M)]
        delta = np.zeros((n, Q))
        delta[:, 0] = 1.0
        return [delta] + [np.zeros((n, Q)) for _ in range(M)]
    return [np.ones((n, Q))] + [np.zeros((n, Q)) for _ in range(M)]


def _finalize_level(state: SigFeatureState, A: np.ndarray, m: int, fourier: bool) -> np.ndarray:
    cfg = state.config
    n = A.shape[0]
    if m == 0:
        return np.ones((n, 1))
    v = cfg.variant
    if v == "rfsf_full":
        return A
    if v == "dp":
        return A.reshape(n, -1) / math.sqrt(cfg.n_components)
    if v == "dp1d":
        return A / math.sqrt(cfg.n_components)
    if v == "trp":
        return A / math.sqrt(cfg.projection)
    return ifft_pow2(A).real if fourier else A


def _transform_block(state: SigFeatureState, X: np.ndarray, counters) -> list:
    cfg = state.config
    M = cfg.n_levels
    p = cfg.effective_order
    n = X.shape[0]
    Z = _lift_increments(state, X, counters)
    V, fourier = _slot_arrays(state, Z, counters)
    A = _init_levels(state, n, fourier)
    T = V[0].shape[1] if M >= 1 else 0
    flops = 0
    for k in range(T):
        for m in range(M, 0, -1):
            tail = V[m - 1][:, k]
            term = _combine(cfg, fourier, A[m - 1], tail)
            A[m] += term
            flops += 2 * term.size
            for q in range(2, min(p, m) + 1):
                tail = _combine(cfg, fourier, V[m - q][:, k], tail)
                term = _combine(cfg, fourier, A[m - q], tail) / math.factorial(q)
                A[m] += term
                flops += tail.size + 3 * term.size
    counters.add_flops(flops)
    counters.observe_bytes(8 * (sum(a.size * (2 if np.iscomplexobj(a) else 1) for a in A)
                                + sum(v.size * (2 if np.iscomplexobj(v) else 1) for v in V)))
    return [_finalize_level(state, A[m], m, fourier) for m in range(M + 1)]


def transform_sig_features(state: SigFeatureState, X, counters=None,
                           n_threads: int = 1) -> LevelBlocks:
    """Level blocks for a batch; parallel over fixed-size sequence blocks."""
    if counters is None:
        counters = ResourceCounters()
    arr = X.data if isinstance(X, SequenceBatch) else np.asarray(X, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError(f"expected a SequenceBatch or (N, L, d) array, got shape {arr.shape}")
    if arr.shape[2] != state.input_dim:
        raise ValueError(
            f"dimension mismatch: state fitted for d={state.input_dim}, got d={arr.shape[2]}")
    if not np.isfinite(arr).all():
        raise ValueError("sequence batch contains non-finite values")
    cfg = state.config
    if cfg.difference and arr.shape[1] < 2 and cfg.n_levels >= 1:
        raise ValueError("difference=True needs sequences with at least 2 points")
    N = arr.shape[0]
    blocks = [np.empty((N, F)) for F in state.level_dims]
    spans = [(i, min(i + _SEQ_BLOCK, N)) for i in range(0, N, _SEQ_BLOCK)]
    task_counters = [ResourceCounters() for _ in spans]

    def work(item):
        idx, (i0, i1) = item
        out = _transform_block(state, arr[i0:i1], task_counters[idx])
        for m, block in enumerate(out):
            blocks[m][i0:i1] = block

    run_tasks(work, enumerate(spans), n_threads)
    for local in task_counters:
        counters.merge(local)
    return LevelBlocks(blocks)


def normalize_levels(blocks: LevelBlocks) -> np.ndarray:
    """Concatenate level blocks with per-level unit row norms.

    Each row's level-m sub-block is scaled to unit Euclidean norm (all-zero
    blocks stay zero), then the whole row is scaled by 1/sqrt(M+1). Rows
    with no zero level therefore have unit norm; the operation is
    idempotent.
    """
    M = blocks.n_levels
    parts = []
    for B in blocks.blocks:
        norms = np.sqrt(np.einsum("ij,ij->i", B, B))
        safe = np.where(norms > 0.0, norms, 1.0)
        parts.append(B / safe[:, None])
    return np.concatenate(parts, axis=1) / math.sqrt(M + 1)


def sig_feature_gram(state: SigFeatureState, X, Y=None, normalize: bool = False,
                     counters=None, n_threads: int = 1) -> np.ndarray:
    """Gram matrix of materialized signature features (optionally normalized)."""
    if counters is None:
        counters = ResourceCounters()
    bx = transform_sig_features(state, X, counters=counters, n_threads=n_threads)
    Fx = normalize_levels(bx) if normalize else bx.concat()
    if Y is None:
        Fy = Fx
    else:
        by = transform_sig_features(state, Y, counters=counters, n_threads=n_threads)
        Fy = normalize_levels(by) if normalize else by.concat()
    counters.add_flops(Fx.shape[0] * Fy.shape[0] * Fx.shape[1])
    K = Fx @ Fy.T
    if Y is None:
        upper = np.triu(K)
        K = upper + np.triu(K, 1).T
    return K


def _lifted_level_grams(state: SigFeatureState, Xa: np.ndarray, Xb: np.ndarray,
                        counters) -> np.ndarray:
    """Exact per-level Grams of the rfsf_full map via the finite-rank lift.

    <Phi_m(x), Phi_m(y)> equals the level-m dual DP value computed with the
    slot-a static kernel replaced by <phi_a(.), phi_a(.)>; only the per-slot
    lifted increment matrices are ever materialized.
    """
    cfg = state.config
    M = cfg.n_levels
    Na, La = Xa.shape[:2]
    Nb, Lb = Xb.shape[:2]
    if M == 0:  # no slots to lift; only the constant level remains
        return np.ones((Na, Nb, 1))
    mats = []
    for st in state.slot_states:
        Ux = transform_static_features(st, Xa, counters=counters)
        Uy = transform_static_features(st, Xb, counters=counters)
        flat = Ux.reshape(Na * La, -1) @ Uy.reshape(Nb * Lb, -1).T
        G = flat.reshape(Na, La, Nb, Lb).transpose(0, 2, 1, 3)
        counters.add_flops(G.size * st.out_dim)
        if cfg.difference:
            A = G[..., 1:, 1:] - G[..., :-1, 1:] - G[..., 1:, :-1] + G[..., :-1, :-1]
        else:
            A = G
        mats.append(A)
    counters.observe_bytes(8 * sum(m.size for m in mats))
    return sig_levels_dp(mats, M, cfg.effective_order, counters=counters)


def _lifted_self_levels(state: SigFeatureState, Xa: np.ndarray, counters) -> np.ndarray:
    """Per-sequence exact level values <Phi_m(x_i), Phi_m(x_i)>, shape (N, M+1)."""
    cfg = state.config
    if cfg.n_levels == 0:
        return np.ones((Xa.shape[0], 1))
    mats = []
    for st in state.slot_states:
        Ux = transform_static_features(st, Xa, counters=counters)
        G = Ux @ Ux.transpose(0, 2, 1)
        counters.add_flops(G.size * st.out_dim)
        if cfg.difference:
            A = G[..., 1:, 1:] - G[..., :-1, 1:] - G[..., 1:, :-1] + G[..., :-1, :-1]
        else:
            A = G
        mats.append(A)
    return sig_levels_dp(mats, cfg.n_levels, cfg.effective_order, counters=counters)


def rfsf_exact_gram(state: SigFeatureState, X, Y=None, normalize: bool = False,
                    counters=None) -> np.ndarray:
    """Exact Gram of a fitted rfsf_full map, never materializing the features.

    Identical (up to round-off) to sig_feature_gram on the same state, but
    costs O(N^2 L^2 sum_a w_a) instead of O(N^2 prod_a w_a), so it stays
    feasible when the concatenated width (2D)^M explodes. normalize applies
    the same per-level normalization as normalize_levels.
    """
    if state.config.variant != "rfsf_full":
        raise ValueError(f"exact Gram factorization applies to rfsf_full, not {state.config.variant!r}")
    if counters is None:
        counters = ResourceCounters()
    Xa = X.data if isinstance(X, SequenceBatch) else np.asarray(X, dtype=np.float64)
    symmetric = Y is None
    Xb = Xa if symmetric else (Y.data if isinstance(Y, SequenceBatch) else np.asarray(Y, dtype=np.float64))
    levels = _lifted_level_grams(state, Xa, Xb, counters)
    if not normalize:
        K = levels.sum(axis=-1)
    else:
        if symmetric:
            dx = np.einsum("iim->im", levels).copy()
            dy = dx
        else:
            dx = _lifted_self_levels(state, Xa, counters)
            dy = _lifted_self_levels(state, Xb, counters)
        K = _normalize_levelwise(levels, dx, dy)
    if symmetric:
        upper = np.triu(K)
        K = upper + np.triu(K, 1).T
    return K
