"""Exact (dual) signature kernels on sequences.

The truncated signature kernel of two sequences is the sum over levels
``m = 0..M`` of level kernels

    k_m(x, y) = sum_{i, j} w_p(i) w_p(j) prod_a C_a[i_a, j_a]

where ``i``/``j`` run over nondecreasing multi-indices of length m into the
increments of x/y, ``C_a`` is the double-differenced static kernel
(``C[i, j] = k(x_i,y_j) - k(x_{i-1},y_j) - k(x_i,y_{j-1}) + k(x_{i-1},y_{j-1})``,
or the raw point kernel when ``difference=False``), and the weight of a
multi-index is ``1/prod(n_b!)`` over the multiplicities ``n_b`` of its
distinct entries, zero if any multiplicity exceeds the order p.

Three algorithms are provided: a brute-force enumerator (the oracle for
everything else), an O((M p^2 + d) L^2) dynamic program over cumulative
sums, and a second-order finite-difference solver for the untruncated
kernel's Goursat PDE, streamed over three antidiagonals so its state is
O(len_x + len_y).

Every routine accepts a per-level list of increment matrices as well as a
single shared one; level m then appends slot m with its own matrix. This is
what makes the finite-rank "lifted" kernels of the random-feature module
exactly computable here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from .errors import ConfigError, NumericError
from .sequences import SequenceBatch
from .static.kernels import StaticKernelSpec, _from_inner, _from_sqdist, _is_dot_kind
from .utils import ResourceCounters, run_tasks

__all__ = [
    "KernelConfig",
    "LevelValues",
    "sig_kernel_bruteforce",
    "sig_kernel_dp",
    "sig_pde_kernel",
    "sig_kernel_gram",
    "sig_levels_dp",
    "sig_levels_bruteforce",
    "increment_tensor",
]

NORMALIZATIONS = ("none", "levelwise", "global")
ALGORITHMS = ("dp", "pde", "bruteforce")

# analytic per-pair DP state: A, R, R_next (p^2 each), sums/cumsum scratch
_DP_STATE_ARRAYS = 6


@dataclass(frozen=True)
class KernelConfig:
    """Truncation level M, order p, differencing and normalization choices.

    order=None means unbounded multiplicities (p = M effectively); an integer
    order is clamped to M. normalization: "none" returns the raw sum over
    levels, "levelwise" averages per-level normalized kernels over the M+1
    levels, "global" divides by sqrt(K(x,x) K(y,y)).
    """

    static: StaticKernelSpec = field(default_factory=StaticKernelSpec)
    n_levels: int = 5
    order: int | None = 1
    difference: bool = True
    normalization: str = "none"

    def __post_init__(self):
        if not (isinstance(self.n_levels, (int, np.integer)) and self.n_levels >= 0):
            raise ValueError(f"n_levels must be a non-negative integer, got {self.n_levels}")
        if self.order is not None and not (
                isinstance(self.order, (int, np.integer)) and self.order >= 1):
            raise ValueError(f"order must be a positive integer or None, got {self.order}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(
                f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}")

    @property
    def effective_order(self) -> int:
        if self.n_levels == 0:
            return 1
        if self.order is None:
            return self.n_levels
        return min(int(self.order), self.n_levels)


@dataclass
class LevelValues:
    """Per-level kernel values k_0..k_M (k_0 is always 1)."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    @property
    def n_levels(self) -> int:
        return self.values.shape[-1] - 1

    def total(self) -> float:
        return float(self.values.sum())

    def __getitem__(self, m):
        return self.values[m]


def _shift_one(a: np.ndarray, axis: int) -> np.ndarray:
    out = np.zeros_like(a)
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    src[axis] = slice(None, -1)
    dst[axis] = slice(1, None)
    out[tuple(dst)] = a[tuple(src)]
    return out


def _excl_cumsum(a: np.ndarray, axis: int) -> np.ndarray:
    # sum of entries strictly before each position along axis
    return _shift_one(np.cumsum(a, axis=axis), axis)


def _level_mats(mats, n_levels: int):
    """Normalize `mats` to a per-level lookup (shared array or list of M)."""
    if isinstance(mats, (list, tuple)):
        if len(mats) != n_levels:
            raise ValueError(
                f"per-level increment list must have n_levels={n_levels} entries, got {len(mats)}")
        arrs = [np.asarray(m, dtype=np.float64) for m in mats]
        shapes = {a.shape for a in arrs}
        if len(shapes) > 1:
            raise ValueError(f"per-level increment matrices disagree on shape: {shapes}")
        return lambda m: arrs[m - 1], arrs[0]
    arr = np.asarray(mats, dtype=np.float64)
    return lambda m: arr, arr


def sig_levels_dp(mats, n_levels: int, order: int = 1, counters=None) -> np.ndarray:
    """Dynamic-programming level kernels from increment matrices.

    mats: one (..., T1, T2) array shared by all levels, or a list of M such
    arrays (level m consumes mats[m-1]). Returns (..., n_levels+1) level
    values with [..., 0] = 1. Order p bounds index multiplicities.

    State: R[q, r][i, j] accumulates weighted products of all length-m
    multi-index pairs whose last entries are (i, j) with current
    multiplicities (q+1, r+1). Extending by a fresh pair sums R over all
    strictly smaller (i', j') (a 2-D exclusive cumulative sum); repeating an
    index divides by its new multiplicity, building the 1/n! weights.
    """
    if counters is None:
        counters = ResourceCounters()
    M = int(n_levels)
    if M >= 1:
        pick, first = _level_mats(mats, M)
    else:
        raw = mats[0] if isinstance(mats, (list, tuple)) and len(mats) else mats
        pick, first = None, np.asarray(raw, dtype=np.float64)
        if first.ndim < 2:
            first = first.reshape((0, 0))
    lead = first.shape[:-2]
    T1, T2 = first.shape[-2:]
    levels = np.zeros(lead + (M + 1,))
    levels[..., 0] = 1.0
    if M == 0 or T1 == 0 or T2 == 0:
        return levels
    p = max(1, min(int(order), M))
    cell = first.size  # lead * T1 * T2
    R = np.zeros((p, p) + first.shape)
    R[0, 0] = pick(1)
    levels[..., 1] = R[0, 0].sum(axis=(-1, -2))
    counters.add_flops(cell)
    for m in range(2, M + 1):
        A = pick(m)
        C = R.sum(axis=(0, 1))
        Rn = np.zeros_like(R)
        Rn[0, 0] = A * _excl_cumsum(_excl_cumsum(C, -1), -2)
        counters.add_flops((p * p + 3) * cell)
        if p > 1:
            SX = R.sum(axis=1)
            SY = R.sum(axis=0)
            counters.add_flops(2 * p * p * cell)
            for qi in range(1, p):
                Rn[qi, 0] = (A / (qi + 1)) * _excl_cumsum(SX[qi - 1], -1)
                Rn[0, qi] = (A / (qi + 1)) * _excl_cumsum(SY[qi - 1], -2)
                counters.add_flops(4 * cell)
            for qi in range(1, p):
                for ri in range(1, p):
                    Rn[qi, ri] = (A / ((qi + 1) * (ri + 1))) * R[qi - 1, ri - 1]
                    counters.add_flops(2 * cell)
        R = Rn
        levels[..., m] = R.sum(axis=(0, 1, -1, -2))
        counters.add_flops(p * p * cell)
    counters.observe_bytes((2 * p * p + _DP_STATE_ARRAYS) * cell * 8)
    return levels


def _index_weight(idx: tuple, order: int) -> float:
    w = 1.0
    run = 1
    for a in range(1, len(idx)):
        if idx[a] == idx[a - 1]:
            run += 1
            if run > order:
                return 0.0
            w /= run
        else:
            run = 1
    return w


def sig_levels_bruteforce(mats, n_levels: int, order: int = 1) -> np.ndarray:
    """Direct enumeration over multi-index pairs; the oracle for the DP.

    Exponential in M; intended for short sequences and small M only.
    """
    M = int(n_levels)
    pick, first = _level_mats(mats, M) if M >= 1 else (None, np.zeros((0, 0)))
    levels = np.zeros(M + 1)
    levels[0] = 1.0
    if M == 0:
        return levels
    T1, T2 = first.shape[-2:]
    if T1 == 0 or T2 == 0:
        return levels
    p = max(1, min(int(order), M))
    for m in range(1, M + 1):
        slot_mats = [pick(a) for a in range(1, m + 1)]
        total = 0.0
        for i in combinations_with_replacement(range(T1), m):
            wi = _index_weight(i, p)
            if wi == 0.0:
                continue
            for j in combinations_with_replacement(range(T2), m):
                wj = _index_weight(j, p)
                if wj == 0.0:
                    continue
                prod = wi * wj
                for a in range(m):
                    prod *= slot_mats[a][i[a], j[a]]
                total += prod
        levels[m] = total
    return levels


def _gram_nd(spec: StaticKernelSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Batched point-kernel matrices: (..., L1, d) x (..., L2, d) -> (..., L1, L2)."""
    if _is_dot_kind(spec.kind):
        return _from_inner(spec, X @ np.swapaxes(Y, -1, -2))
    xx = np.einsum("...ij,...ij->...i", X, X)
    yy = np.einsum("...ij,...ij->...i", Y, Y)
    sq = xx[..., :, None] + yy[..., None, :] - 2.0 * (X @ np.swapaxes(Y, -1, -2))
    np.maximum(sq, 0.0, out=sq)
    return _from_sqdist(spec, sq)


def increment_tensor(spec: StaticKernelSpec, X, Y, difference: bool = True,
                     counters=None) -> np.ndarray:
    """Increment matrices C for (batched) point arrays (..., L, d).

    difference=True: the double difference of the point-kernel matrix,
    shape (..., L1-1, L2-1). difference=False: the raw point-kernel matrix.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    G = _gram_nd(spec, X, Y)
    if counters is not None:
        counters.add_flops(G.size * X.shape[-1])
    if not difference:
        return G
    if X.shape[-2] < 2 or Y.shape[-2] < 2:
        return np.zeros(G.shape[:-2] + (max(X.shape[-2] - 1, 0), max(Y.shape[-2] - 1, 0)))
    if counters is not None:
        counters.add_flops(3 * (G.shape[-1] - 1) * (G.shape[-2] - 1) * int(np.prod(G.shape[:-2], dtype=np.int64)))
    return (G[..., 1:, 1:] - G[..., :-1, 1:] - G[..., 1:, :-1] + G[..., :-1, :-1])


def _check_finite(arr: np.ndarray, what: str) -> None:
    if not np.isfinite(arr).all():
        raise ValueError(f"{what} contains non-finite values")


def _as_pair_points(x) -> np.ndarray:
    pts = np.asarray(x, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise ValueError(f"a sequence must be a (L, d) array, got shape {pts.shape}")
    _check_finite(pts, "sequence")
    return pts


def sig_kernel_bruteforce(x, y, cfg: KernelConfig) -> LevelValues:
    """Level kernels by direct enumeration (small inputs only)."""
    x = _as_pair_points(x)
    y = _as_pair_points(y)
    A = increment_tensor(cfg.static, x, y, cfg.difference)
    return LevelValues(sig_levels_bruteforce(A, cfg.n_levels, cfg.effective_order))


def sig_kernel_dp(x, y, cfg: KernelConfig, counters=None) -> LevelValues:
    """Level kernels by the cumulative-sum dynamic program."""
    x = _as_pair_points(x)
    y = _as_pair_points(y)
    A = increment_tensor(cfg.static, x, y, cfg.difference, counters=counters)
    return LevelValues(sig_levels_dp(A, cfg.n_levels, cfg.effective_order, counters=counters))


def _rowwise_pairs(spec: StaticKernelSpec, Xp: np.ndarray, Yp: np.ndarray) -> np.ndarray:
    """k(x_k, y_k) along a shared index: (b1,K,d) x (b2,K,d) -> (b1,b2,K)."""
    if _is_dot_kind(spec.kind):
        return _from_inner(spec, np.einsum("akd,bkd->abk", Xp, Yp))
    xx = np.einsum("akd,akd->ak", Xp, Xp)
    yy = np.einsum("bkd,bkd->bk", Yp, Yp)
    sq = xx[:, None, :] + yy[None, :, :] - 2.0 * np.einsum("akd,bkd->abk", Xp, Yp)
    np.maximum(sq, 0.0, out=sq)
    return _from_sqdist(spec, sq)


def _rowwise_paired(spec: StaticKernelSpec, Xp: np.ndarray, Yp: np.ndarray) -> np.ndarray:
    """k(x_k, y_k) elementwise over matching leading shapes (..., K, d) -> (..., K)."""
    if _is_dot_kind(spec.kind):
        return _from_inner(spec, np.einsum("...kd,...kd->...k", Xp, Yp))
    W = Xp - Yp
    return _from_sqdist(spec, np.einsum("...kd,...kd->...k", W, W))


def _pde_stream(spec: StaticKernelSpec, X: np.ndarray, Y: np.ndarray,
                difference: bool, paired: bool, counters=None) -> np.ndarray:
    """Antidiagonal-streamed Goursat solve.

    paired=False: X (b1,Lx,d), Y (b2,Ly,d) -> (b1,b2) all pairs.
    paired=True:  X (n,Lx,d),  Y (n,Ly,d)  -> (n,)    matched pairs.

    The grid holds T1 x T2 increment cells (T = L-1, or L raw cells when
    difference=False); the solver carries three antidiagonals of the
    solution and, when differencing, three antidiagonals of the point
    kernel, so the working set is linear in the lengths.
    """
    if counters is None:
        counters = ResourceCounters()
    Lx, Ly = X.shape[-2], Y.shape[-2]
    d = X.shape[-1]
    if difference:
        T1, T2 = Lx - 1, Ly - 1
        if T1 < 1 or T2 < 1:
            raise ValueError("pde kernel needs at least one increment per sequence")
    else:
        T1, T2 = Lx, Ly
    lead = (X.shape[0],) if paired else (X.shape[0], Y.shape[0])
    n_cells = int(np.prod(lead, dtype=np.int64))
    maxdiag = min(T1, T2) + 1
    counters.observe_bytes((6 * n_cells * maxdiag + 2 * n_cells * maxdiag * d) * 8)

    def point_diag(ks: np.ndarray, ls: np.ndarray) -> np.ndarray:
        Xp = X[:, ks, :]
        Yp = Y[:, ls, :]
        counters.add_flops(n_cells * len(ks) * d)
        if paired:
            return _rowwise_paired(spec, Xp, Yp)
        return _rowwise_pairs(spec, Xp, Yp)

    Kp1 = Kp2 = None
    Pp1 = Pp2 = None
    cur = None
    for s in range(0, T1 + T2 + 1):
        klo = max(0, s - T2)
        khi = min(s, T1)
        ks = np.arange(klo, khi + 1)
        ls = s - ks
        cur = np.ones(lead + (len(ks),))
        P_cur = point_diag(ks, ls) if difference else None
        ik_lo = max(1, klo)
        ik_hi = min(khi, s - 1)
        count = ik_hi - ik_lo + 1
        if count > 0:
            klo1 = max(0, s - 1 - T2)
            klo2 = max(0, s - 2 - T2)
            i0 = ik_lo - klo
            left = Kp1[..., ik_lo - 1 - klo1:ik_lo - 1 - klo1 + count]    # K(k-1, l)
            down = Kp1[..., ik_lo - klo1:ik_lo - klo1 + count]            # K(k, l-1)
            diag = Kp2[..., ik_lo - 1 - klo2:ik_lo - 1 - klo2 + count]    # K(k-1, l-1)
            if difference:
                C = (P_cur[..., i0:i0 + count]
                     - Pp1[..., ik_lo - 1 - klo1:ik_lo - 1 - klo1 + count]
                     - Pp1[..., ik_lo - klo1:ik_lo - klo1 + count]
                     + Pp2[..., ik_lo - 1 - klo2:ik_lo - 1 - klo2 + count])
            else:
                iks = ks[i0:i0 + count]
                C = point_diag(iks - 1, s - iks - 1)
            both = down + left
            cur[..., i0:i0 + count] = both - diag + 0.5 * C * both
            counters.add_flops(n_cells * count * 6)
        Kp2, Kp1 = Kp1, cur
        Pp2, Pp1 = Pp1, P_cur
    return cur[..., 0]


def sig_pde_kernel(x, y, cfg: KernelConfig, counters=None) -> float:
    """Untruncated signature kernel via the finite-difference PDE solve."""
    x = _as_pair_points(x)
    y = _as_pair_points(y)
    out = _pde_stream(cfg.static, x[None], y[None], cfg.difference, paired=True,
                      counters=counters)
    return float(out[0])


def _batch_points(X) -> np.ndarray:
    if isinstance(X, SequenceBatch):
        arr = X.data
    else:
        arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError(f"expected a SequenceBatch or (N, L, d) array, got shape {arr.shape}")
    _check_finite(arr, "sequence batch")
    return arr


def _blocks(n: int, size: int):
    return [(i, min(i + size, n)) for i in range(0, n, size)]


def _mirror_levels(tile: np.ndarray) -> np.ndarray:
    # (b, b, M+1) diagonal block -> bitwise-symmetric in the first two axes
    for m in range(tile.shape[-1]):
        upper = np.triu(tile[..., m])
        tile[..., m] = upper + np.triu(tile[..., m], 1).T
    return tile


def _dp_level_gram(spec, Xa, Xb, M, p, difference, symmetric, n_threads,
                   tile_memory, counters):
    Nx, Lx = Xa.shape[0], Xa.shape[1]
    Ny, Ly = Xb.shape[0], Xb.shape[1]
    T1 = Lx - 1 if difference else Lx
    T2 = Ly - 1 if difference else Ly
    per_pair = 8 * (Lx * Ly + (2 * p * p + _DP_STATE_ARRAYS) * max(T1 * T2, 1))
    pairs_per_tile = max(1, int(tile_memory) // per_pair)
    b = max(1, int(math.isqrt(pairs_per_tile)))
    row_blocks = _blocks(Nx, b)
    col_blocks = _blocks(Ny, b)
    levels = np.empty((Nx, Ny, M + 1))
    tasks = []
    for bi, (i0, i1) in enumerate(row_blocks):
        for bj, (j0, j1) in enumerate(col_blocks):
            if symmetric and bj < bi:
                continue
            tasks.append((i0, i1, j0, j1))
    task_counters = [ResourceCounters() for _ in tasks]

    def work(item):
        idx, (i0, i1, j0, j1) = item
        local = task_counters[idx]
        A = increment_tensor(spec, Xa[i0:i1, None], Xb[None, j0:j1], difference,
                             counters=local)
        tile = sig_levels_dp(A, M, p, counters=local)
        local.observe_bytes((i1 - i0) * (j1 - j0) * per_pair)
        if symmetric and i0 == j0:
            tile = _mirror_levels(tile)
        levels[i0:i1, j0:j1] = tile
        if symmetric and j0 > i0:
            levels[j0:j1, i0:i1] = tile.transpose(1, 0, 2)

    run_tasks(work, enumerate(tasks), n_threads)
    for local in task_counters:
        counters.merge(local)
    return levels


def _pde_gram(spec, Xa, Xb, difference, symmetric, n_threads, tile_memory, counters):
    Nx, Ny = Xa.shape[0], Xb.shape[0]
    Lsum = Xa.shape[1] + Xb.shape[1]
    per_pair = 8 * 8 * Lsum
    pairs_per_tile = max(1, int(tile_memory) // per_pair)
    b = max(1, int(math.isqrt(pairs_per_tile)))
    row_blocks = _blocks(Nx, b)
    col_blocks = _blocks(Ny, b)
    out = np.empty((Nx, Ny))
    tasks = []
    for bi, (i0, i1) in enumerate(row_blocks):
        for bj, (j0, j1) in enumerate(col_blocks):
            if symmetric and bj < bi:
                continue
            tasks.append((i0, i1, j0, j1))
    task_counters = [ResourceCounters() for _ in tasks]

    def work(item):
        idx, (i0, i1, j0, j1) = item
        tile = _pde_stream(spec, Xa[i0:i1], Xb[j0:j1], difference, paired=False,
                           counters=task_counters[idx])
        if symmetric and i0 == j0:
            upper = np.triu(tile)
            tile = upper + np.triu(tile, 1).T
        out[i0:i1, j0:j1] = tile
        if symmetric and j0 > i0:
            out[j0:j1, i0:i1] = tile.T

    run_tasks(work, enumerate(tasks), n_threads)
    for local in task_counters:
        counters.merge(local)
    return out


def _normalize_levelwise(levels, diag_x, diag_y):
    M = levels.shape[-1] - 1
    dx = np.clip(diag_x, 0.0, None)
    dy = np.clip(diag_y, 0.0, None)
    denom = np.sqrt(dx[:, None, :] * dy[None, :, :])
    terms = np.divide(levels, denom, out=np.zeros_like(levels), where=denom > 0)
    return terms.sum(axis=-1) / (M + 1)


def _normalize_global(K, self_x, self_y, what):
    bad_x = np.flatnonzero(self_x <= 0)
    bad_y = np.flatnonzero(self_y <= 0)
    if bad_x.size or bad_y.size:
        which = bad_x if bad_x.size else bad_y
        raise NumericError(
            f"global normalization undefined: non-positive self-kernel for "
            f"{what} sequence index {int(which[0])}")
    return K / np.sqrt(self_x[:, None] * self_y[None, :])


def sig_kernel_gram(X, Y=None, cfg: KernelConfig = None, algorithm: str = "dp",
                    n_threads: int = 1, counters=None,
                    tile_memory: int = 256 * 2 ** 20) -> np.ndarray:
    """Pairwise signature-kernel matrix between two sequence batches.

    X, Y: SequenceBatch or (N, L, d) arrays; Y=None means gram(X, X), which
    computes the upper block triangle and mirrors it (bitwise symmetric).
    algorithm: "dp" (truncated kernel), "pde" (untruncated PDE kernel, which
    rejects levelwise normalization), or "bruteforce" (oracle, tiny inputs).

    Work is split into fixed-size pair tiles (bounded by tile_memory bytes of
    DP state) executed by n_threads workers; the tiling is independent of the
    thread count, so results are byte-identical for any n_threads.
    """
    if cfg is None:
        cfg = KernelConfig()
    if algorithm not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
    if counters is None:
        counters = ResourceCounters()
    Xa = _batch_points(X)
    symmetric = Y is None
    Xb = Xa if symmetric else _batch_points(Y)
    if Xa.shape[2] != Xb.shape[2]:
        raise ValueError(f"channel mismatch: d={Xa.shape[2]} vs d={Xb.shape[2]}")
    M = cfg.n_levels
    p = cfg.effective_order

    if algorithm == "pde":
        if cfg.normalization == "levelwise":
            raise ConfigError(
                "kernel.normalization: levelwise normalization requires level values; "
                "the pde algorithm supports none/global")
        K = _pde_gram(cfg.static, Xa, Xb, cfg.difference, symmetric, n_threads,
                      tile_memory, counters)
        if cfg.normalization == "global":
            self_x = _pde_stream(cfg.static, Xa, Xa, cfg.difference, paired=True,
                                 counters=counters)
            self_y = self_x if symmetric else _pde_stream(
                cfg.static, Xb, Xb, cfg.difference, paired=True, counters=counters)
            K = _normalize_global(K, self_x, self_y, "input")
        return K

    if algorithm == "bruteforce":
        levels = np.empty((Xa.shape[0], Xb.shape[0], M + 1))
        for i in range(Xa.shape[0]):
            j_start = i if symmetric else 0
            for j in range(j_start, Xb.shape[0]):
                A = increment_tensor(cfg.static, Xa[i], Xb[j], cfg.difference)
                levels[i, j] = sig_levels_bruteforce(A, M, p)
                if symmetric and j > i:
                    levels[j, i] = levels[i, j]
    else:
        levels = _dp_level_gram(cfg.static, Xa, Xb, M, p, cfg.difference, symmetric,
                                n_threads, tile_memory, counters)

    if cfg.normalization == "none":
        return levels.sum(axis=-1)

    A_self = increment_tensor(cfg.static, Xa, Xa, cfg.difference, counters=counters)
    diag_x = sig_levels_dp(A_self, M, p, counters=counters)
    if symmetric:
        diag_y = diag_x
    else:
        B_self = increment_tensor(cfg.static, Xb, Xb, cfg.difference, counters=counters)
        diag_y = sig_levels_dp(B_self, M, p, counters=counters)

    if cfg.normalization == "levelwise":
        return _normalize_levelwise(levels, diag_x, diag_y)
    K = levels.sum(axis=-1)
    return _normalize_global(K, diag_x.sum(axis=-1), diag_y.sum(axis=-1), "input")
