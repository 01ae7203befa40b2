"""Gram-accuracy and scalability measurement harness.

mape() is the headline error metric: the mean absolute percentage error of
an approximate Gram against an exact one over ordered distinct pairs.
run_bench() sweeps problem sizes for the dual and primal methods, recording
analytic feature widths, instrumented flop counts, peak-byte estimates and
(optionally) per-seed-median MAPE against the exact truncated kernel.
run_classify() is a synthetic two-class drift experiment: kernel ridge with
cross-validated regularization on a levelwise-normalized signature Gram.

Wall-clock fields can be disabled (wall_time=False zeroes them) so records
are byte-for-byte reproducible across machines and thread counts.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, fields

import numpy as np

from .errors import NumericError
from .features import SigFeatureConfig, fit_sig_features, rfsf_exact_gram, sig_feature_gram
from .kernels import KernelConfig, sig_kernel_gram
from .models import fit_ridge, grid_cv
from .rng import SeedStream
from .sequences import gen_brownian, _format_value
from .static.kernels import StaticKernelSpec, median_heuristic
from .static.features import StaticFeatureSpec
from .utils import ResourceCounters

__all__ = [
    "mape",
    "BenchRecord",
    "BenchSettings",
    "ClassifySettings",
    "run_bench",
    "run_classify",
    "write_bench_csv",
    "DUAL_METHODS",
    "PRIMAL_METHODS",
    "BENCH_METHODS",
]

DUAL_METHODS = ("dual_dp", "dual_pde")
PRIMAL_METHODS = ("rfsf_full", "dp", "dp1d", "trp", "ts")
BENCH_METHODS = DUAL_METHODS + PRIMAL_METHODS

# concatenated widths above this are never materialized; rfsf_full falls
# back to its exact finite-rank Gram factorization
_MAX_MATERIALIZED_WIDTH = 200_000


def mape(exact: np.ndarray, approx: np.ndarray) -> float:
    """Mean absolute percentage error over ordered distinct Gram pairs.

    (1/(N(N-1))) sum_{i != j} |approx_ij / exact_ij - 1|. Both matrices must
    be square of equal shape with N >= 2; zero exact off-diagonal entries
    make the metric undefined and raise NumericError naming the pairs.
    """
    exact = np.asarray(exact, dtype=np.float64)
    approx = np.asarray(approx, dtype=np.float64)
    if exact.ndim != 2 or exact.shape[0] != exact.shape[1]:
        raise ValueError(f"exact Gram must be square, got shape {exact.shape}")
    if approx.shape != exact.shape:
        raise ValueError(f"shape mismatch: exact {exact.shape}, approx {approx.shape}")
    N = exact.shape[0]
    if N < 2:
        raise ValueError(f"MAPE needs at least 2 sequences, got N={N}")
    off = ~np.eye(N, dtype=bool)
    zero = (exact == 0.0) & off
    if zero.any():
        pairs = list(zip(*np.nonzero(zero)))[:8]
        shown = ", ".join(f"({int(i)},{int(j)})" for i, j in pairs)
        raise NumericError(
            f"MAPE denominator degenerate: exact Gram has zero off-diagonal "
            f"entries at pairs {shown}")
    ratios = np.abs(approx[off] / exact[off] - 1.0)
    return float(ratios.sum() / (N * (N - 1)))


@dataclass
class BenchRecord:
    """One measured (method, problem size) cell of a benchmark sweep.

    F is the analytic output width: the concatenated feature width for
    primal methods, N (Gram side) for dual methods. mape is None for dual
    methods and for sweeps that skip accuracy measurement.
    """

    method: str
    N: int
    L: int
    d: int
    M: int
    p: int
    D: int
    Q: int
    F: int
    wall_ms: float
    flop_count: int
    peak_bytes_est: int
    mape: float | None = None


def bench_header() -> list:
    return [f.name for f in fields(BenchRecord)]


def write_bench_csv(path, records) -> None:
    lines = [",".join(bench_header())]
    for r in records:
        row = []
        for f in fields(BenchRecord):
            v = getattr(r, f.name)
            if v is None:
                row.append("")
            elif isinstance(v, str):
                row.append(v)
            else:
                row.append(_format_value(v))
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass(frozen=True)
class BenchSettings:
    """Sweep grid and measurement switches for run_bench."""

    methods: tuple = BENCH_METHODS
    n_list: tuple = (10,)
    l_list: tuple = (100,)
    dq_list: tuple = (100,)  # D = Q for every primal method
    m_list: tuple = (5,)
    dim: int = 5
    order: int | None = 1
    difference: bool = True
    static_kind: str = "rbf"
    bandwidth: float | str = "median"
    n_seeds: int = 1
    compute_mape: bool = False
    wall_time: bool = True

    def __post_init__(self):
        for m in self.methods:
            if m not in BENCH_METHODS:
                raise ValueError(f"unknown bench method {m!r}; choose from {BENCH_METHODS}")
        if self.n_seeds < 1:
            raise ValueError(f"n_seeds must be >= 1, got {self.n_seeds}")


def _feature_config(method: str, settings: BenchSettings, bw: float, DQ: int,
                    M: int) -> SigFeatureConfig:
    kind = "rff1d" if method == "dp1d" else "rff"
    static = StaticFeatureSpec(kind=kind, n_components=DQ, bandwidth=bw)
    return SigFeatureConfig(variant=method, static=static, n_components=DQ,
                            projection=DQ, n_levels=M, order=settings.order,
                            difference=settings.difference)


def _primal_gram(state, data, counters, n_threads):
    if (state.config.variant == "rfsf_full"
            and sum(state.level_dims) > _MAX_MATERIALIZED_WIDTH):
        return rfsf_exact_gram(state, data, counters=counters)
    return sig_feature_gram(state, data, counters=counters, n_threads=n_threads)


def run_bench(settings: BenchSettings, seed: SeedStream, n_threads: int = 1) -> list:
    """Run the sweep; records appear in (N, L, DQ, M) x methods order."""
    if not isinstance(seed, SeedStream):
        seed = SeedStream(int(seed))
    records = []
    exact_cache = {}
    for N in settings.n_list:
        for L in settings.l_list:
            data = gen_brownian(int(N), int(L), settings.dim,
                                seed.child(f"data_n{N}_l{L}"))
            if settings.bandwidth == "median":
                bw = median_heuristic(data.points())
            else:
                bw = float(settings.bandwidth)
            for DQ in settings.dq_list:
                for M in settings.m_list:
                    p = settings.order if settings.order is not None else M
                    p = min(max(p, 1), max(M, 1))
                    kcfg = KernelConfig(
                        static=StaticKernelSpec(kind=settings.static_kind, bandwidth=bw),
                        n_levels=int(M), order=settings.order,
                        difference=settings.difference)
                    exact = None
                    if settings.compute_mape:
                        key = (int(N), int(L), int(M))
                        if key not in exact_cache:
                            exact_cache[key] = sig_kernel_gram(
                                data, cfg=kcfg, algorithm="dp", n_threads=n_threads)
                        exact = exact_cache[key]
                    for method in settings.methods:
                        records.append(_bench_cell(
                            method, data, kcfg, exact, settings, bw,
                            int(N), int(L), int(DQ), int(M), p, seed, n_threads))
    return records


def _bench_cell(method, data, kcfg, exact, settings, bw, N, L, DQ, M, p,
                seed, n_threads) -> BenchRecord:
    counters = ResourceCounters()
    t0 = time.perf_counter()
    err = None
    if method in DUAL_METHODS:
        algo = "dp" if method == "dual_dp" else "pde"
        sig_kernel_gram(data, cfg=kcfg, algorithm=algo, n_threads=n_threads,
                        counters=counters)
        width = N
    else:
        fcfg = _feature_config(method, settings, bw, DQ, M)
        maples = []
        width = None
        for s in range(settings.n_seeds):
            fit_seed = seed.child(f"fit_{method}_n{N}_l{L}_dq{DQ}_m{M}_s{s}")
            local = counters if s == 0 else ResourceCounters()
            state = fit_sig_features(fcfg, data, fit_seed)
            G = _primal_gram(state, data, local, n_threads)
            if width is None:
                width = sum(state.level_dims)
            if exact is not None:
                maples.append(mape(exact, G))
        err = float(np.median(maples)) if maples else None
    wall = (time.perf_counter() - t0) * 1e3 if settings.wall_time else 0.0
    return BenchRecord(method=method, N=N, L=L, d=settings.dim, M=M, p=p,
                       D=DQ, Q=DQ, F=int(width), wall_ms=wall,
                       flop_count=counters.flops,
                       peak_bytes_est=counters.peak_bytes, mape=err)


@dataclass(frozen=True)
class ClassifySettings:
    """Synthetic two-class drift classification experiment."""

    n_per_class: int = 100
    length: int = 50
    dim: int = 3
    drift: float = 0.5
    n_levels: int = 4
    order: int | None = 1
    static_kind: str = "rbf"
    bandwidth: float | str = "median"
    lambdas: tuple = (1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3)
    n_folds: int = 3
    n_seeds: int = 5

    def __post_init__(self):
        if self.n_per_class < 2 * self.n_folds:
            raise ValueError(
                f"n_per_class={self.n_per_class} too small for a half split "
                f"with {self.n_folds}-fold CV")
        if self.n_seeds < 1:
            raise ValueError(f"n_seeds must be >= 1, got {self.n_seeds}")


def run_classify(settings: ClassifySettings, seed: SeedStream,
                 n_threads: int = 1) -> dict:
    """Per-seed held-out accuracies of ridge over the normalized signature Gram.

    Each trial samples two classes of Brownian sequences whose first channel
    drifts by +/- settings.drift per step, splits each class in half
    (train/test), picks lambda by stratified grid_cv on the train Gram and
    reports test accuracy. Returns per-seed rows and the median accuracy.
    """
    if not isinstance(seed, SeedStream):
        seed = SeedStream(int(seed))
    n = settings.n_per_class
    drift_vec = np.zeros(settings.dim)
    rows = []
    for s in range(settings.n_seeds):
        trial = seed.child(f"trial{s}")
        drift_vec[0] = -settings.drift
        neg = gen_brownian(n, settings.length, settings.dim,
                           trial.child("class0"), drift=drift_vec)
        drift_vec[0] = settings.drift
        pos = gen_brownian(n, settings.length, settings.dim,
                           trial.child("class1"), drift=drift_vec)
        data = np.concatenate([neg.data, pos.data], axis=0)
        labels = np.repeat([0, 1], n)
        split_rng = trial.child("split").generator()
        train_mask = np.zeros(2 * n, dtype=bool)
        for cls in (0, 1):
            idx = split_rng.permutation(np.flatnonzero(labels == cls))
            train_mask[idx[: n // 2]] = True
        if settings.bandwidth == "median":
            bw = median_heuristic(data[train_mask].reshape(-1, settings.dim))
        else:
            bw = float(settings.bandwidth)
        kcfg = KernelConfig(
            static=StaticKernelSpec(kind=settings.static_kind, bandwidth=bw),
            n_levels=settings.n_levels, order=settings.order,
            normalization="levelwise")
        K = sig_kernel_gram(data, cfg=kcfg, algorithm="dp", n_threads=n_threads)
        tr = np.flatnonzero(train_mask)
        te = np.flatnonzero(~train_mask)
        best_lam, _ = grid_cv(settings.lambdas, settings.n_folds,
                              K[np.ix_(tr, tr)], labels[tr], trial.child("cv"),
                              mode="kernel", n_threads=n_threads)
        model = fit_ridge(K[np.ix_(tr, tr)], labels[tr], best_lam, mode="kernel")
        pred = model.predict(K[np.ix_(te, tr)])
        acc = float(np.mean(pred == labels[te]))
        rows.append({"seed_index": s, "best_lambda": best_lam, "accuracy": acc})
    median = float(np.median([r["accuracy"] for r in rows]))
    return {"rows": rows, "median_accuracy": median}
