"""Tests for the benchmark harness: MAPE, sweep records, CSV output, classify."""

import dataclasses

import numpy as np
import pytest

from sigkern import (
    BenchRecord,
    BenchSettings,
    ClassifySettings,
    NumericError,
    SeedStream,
    mape,
    run_bench,
    run_classify,
)
from sigkern.benchmarks import (
    BENCH_METHODS,
    DUAL_METHODS,
    PRIMAL_METHODS,
    bench_header,
    write_bench_csv,
)


def _mape_oracle(exact, approx):
    # direct double loop over ordered distinct pairs
    N = exact.shape[0]
    total = 0.0
    for i in range(N):
        for j in range(N):
            if i != j:
                total += abs(approx[i, j] / exact[i, j] - 1.0)
    return total / (N * (N - 1))


class TestMape:
    def test_identical_grams_zero(self):
        rng = np.random.default_rng(0)
        G = rng.standard_normal((5, 5)) + 3.0
        assert mape(G, G) == 0.0

    def test_scaled_by_four_gives_three(self):
        rng = np.random.default_rng(1)
        G = rng.standard_normal((4, 4)) + 2.0
        assert mape(G, 4.0 * G) == pytest.approx(3.0, abs=1e-12)

    def test_two_by_two_half(self):
        exact = np.array([[1.0, 2.0], [2.0, 1.0]])
        approx = np.array([[1.0, 3.0], [3.0, 1.0]])
        assert mape(exact, approx) == pytest.approx(0.5, abs=1e-15)

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(2)
        exact = rng.standard_normal((6, 6)) + 4.0
        approx = exact + 0.3 * rng.standard_normal((6, 6))
        assert mape(exact, approx) == pytest.approx(
            _mape_oracle(exact, approx), rel=1e-12)

    def test_diagonal_ignored(self):
        exact = np.array([[0.0, 2.0], [2.0, 0.0]])
        approx = np.array([[99.0, 2.0], [2.0, -5.0]])
        assert mape(exact, approx) == 0.0

    def test_symmetric_equals_unordered_average(self):
        # for symmetric inputs the ordered-pair mean equals the i<j mean
        rng = np.random.default_rng(3)
        A = rng.standard_normal((5, 5))
        exact = A @ A.T + 5.0 * np.eye(5) + 1.0
        approx = exact * (1.0 + 0.1 * np.arange(5)[:, None] * np.arange(5))
        approx = (approx + approx.T) / 2
        upper = [abs(approx[i, j] / exact[i, j] - 1.0)
                 for i in range(5) for j in range(i + 1, 5)]
        assert mape(exact, approx) == pytest.approx(np.mean(upper), rel=1e-12)

    def test_zero_offdiagonal_raises_with_pairs(self):
        exact = np.array([[1.0, 0.0], [2.0, 1.0]])
        approx = np.ones((2, 2))
        with pytest.raises(NumericError, match=r"\(0,1\)"):
            mape(exact, approx)

    def test_zero_offdiagonal_lists_multiple_pairs(self):
        exact = np.ones((3, 3))
        exact[0, 2] = 0.0
        exact[2, 1] = 0.0
        with pytest.raises(NumericError, match=r"\(0,2\), \(2,1\)"):
            mape(exact, np.ones((3, 3)))

    def test_non_square_rejected(self):
        with pytest.raises(ValueError, match="square"):
            mape(np.ones((2, 3)), np.ones((2, 3)))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="mismatch"):
            mape(np.ones((3, 3)), np.ones((2, 2)))

    def test_single_sequence_rejected(self):
        with pytest.raises(ValueError, match="at least 2"):
            mape(np.ones((1, 1)), np.ones((1, 1)))


class TestBenchCsv:
    def _record(self, **over):
        base = dict(method="trp", N=4, L=10, d=2, M=3, p=1, D=8, Q=8, F=25,
                    wall_ms=1.5, flop_count=1234, peak_bytes_est=4096,
                    mape=0.125)
        base.update(over)
        return BenchRecord(**base)

    def test_header_matches_record_fields(self):
        names = [f.name for f in dataclasses.fields(BenchRecord)]
        assert bench_header() == names
        assert bench_header() == [
            "method", "N", "L", "d", "M", "p", "D", "Q", "F",
            "wall_ms", "flop_count", "peak_bytes_est", "mape"]

    def test_csv_roundtrip(self, tmp_path):
        recs = [self._record(), self._record(method="dual_dp", mape=None)]
        path = tmp_path / "bench.csv"
        write_bench_csv(path, recs)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(bench_header())
        assert len(lines) == 3
        row = lines[1].split(",")
        assert row[0] == "trp"
        assert [int(v) for v in row[1:9]] == [4, 10, 2, 3, 1, 8, 8, 25]
        assert float(row[9]) == 1.5
        assert int(row[10]) == 1234
        assert int(row[11]) == 4096
        assert float(row[12]) == 0.125

    def test_none_mape_becomes_empty_field(self, tmp_path):
        path = tmp_path / "bench.csv"
        write_bench_csv(path, [self._record(method="dual_pde", mape=None)])
        row = path.read_text().splitlines()[1]
        assert row.endswith(",")
        assert row.split(",")[-1] == ""

    def test_float_fields_roundtrip_exactly(self, tmp_path):
        rec = self._record(wall_ms=0.1234567890123456, mape=1 / 3)
        path = tmp_path / "bench.csv"
        write_bench_csv(path, [rec])
        row = path.read_text().splitlines()[1].split(",")
        assert float(row[9]) == rec.wall_ms
        assert float(row[12]) == rec.mape


class TestBenchSettings:
    def test_defaults(self):
        s = BenchSettings()
        assert s.methods == BENCH_METHODS
        assert s.n_seeds == 1
        assert s.wall_time is True
        assert s.compute_mape is False

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError, match="unknown bench method 'svd'"):
            BenchSettings(methods=("svd",))

    def test_bad_seed_count_rejected(self):
        with pytest.raises(ValueError, match="n_seeds"):
            BenchSettings(n_seeds=0)

    def test_method_tuples_cover_all(self):
        assert set(DUAL_METHODS) == {"dual_dp", "dual_pde"}
        assert set(PRIMAL_METHODS) == {"rfsf_full", "dp", "dp1d", "trp", "ts"}
        assert BENCH_METHODS == DUAL_METHODS + PRIMAL_METHODS


def _small_settings(**over):
    base = dict(methods=("dual_dp", "trp"), n_list=(3,), l_list=(6,),
                dq_list=(4,), m_list=(2,), dim=2, bandwidth=1.0,
                wall_time=False)
    base.update(over)
    return BenchSettings(**base)


class TestRunBench:
    def test_record_count_and_order(self):
        settings = _small_settings(n_list=(2, 3), dq_list=(2, 4))
        recs = run_bench(settings, SeedStream(5))
        assert len(recs) == 2 * 2 * 2
        # grid is N -> L -> DQ -> M, methods innermost
        expect = [(n, dq, m) for n in (2, 3) for dq in (2, 4)
                  for m in ("dual_dp", "trp")]
        assert [(r.N, r.D, r.method) for r in recs] == expect

    def test_size_fields_copied(self):
        recs = run_bench(_small_settings(), SeedStream(5))
        for r in recs:
            assert (r.N, r.L, r.d, r.M, r.p) == (3, 6, 2, 2, 1)
            assert r.D == r.Q == 4

    def test_dual_width_is_gram_side(self):
        recs = run_bench(_small_settings(methods=DUAL_METHODS, n_list=(4,)),
                         SeedStream(5))
        assert all(r.F == 4 for r in recs)

    def test_primal_widths_analytic(self):
        settings = _small_settings(methods=PRIMAL_METHODS, m_list=(3,),
                                   dq_list=(4,))
        recs = run_bench(settings, SeedStream(5))
        D = 4
        M = 3
        expect = {
            "rfsf_full": 1 + sum((2 * D) ** m for m in range(1, M + 1)),
            "dp": 1 + sum((2 ** m) * D for m in range(1, M + 1)),
            "dp1d": 1 + M * D,
            "trp": 1 + M * D,
            "ts": 1 + M * D,
        }
        assert {r.method: r.F for r in recs} == expect

    def test_wall_time_disabled_zeroes_field(self):
        recs = run_bench(_small_settings(), SeedStream(5))
        assert all(r.wall_ms == 0.0 for r in recs)

    def test_wall_time_enabled_positive(self):
        recs = run_bench(_small_settings(wall_time=True), SeedStream(5))
        assert all(r.wall_ms > 0.0 for r in recs)

    def test_counters_populated(self):
        recs = run_bench(_small_settings(), SeedStream(5))
        for r in recs:
            assert r.flop_count > 0
            assert r.peak_bytes_est > 0

    def test_mape_disabled_gives_none(self):
        recs = run_bench(_small_settings(), SeedStream(5))
        assert all(r.mape is None for r in recs)

    def test_mape_enabled_primal_only(self):
        settings = _small_settings(methods=("dual_dp", "dual_pde", "trp", "dp"),
                                   compute_mape=True, n_seeds=2)
        recs = run_bench(settings, SeedStream(5))
        by_method = {r.method: r for r in recs}
        assert by_method["dual_dp"].mape is None
        assert by_method["dual_pde"].mape is None
        for m in ("trp", "dp"):
            assert isinstance(by_method[m].mape, float)
            assert np.isfinite(by_method[m].mape)
            assert by_method[m].mape >= 0.0

    def test_rfsf_full_exact_mape_tiny(self):
        # the exact factorization reproduces the lifted kernel so its MAPE
        # against the rff-lift DP Gram is numerically zero
        settings = _small_settings(methods=("rfsf_full",), compute_mape=True,
                                   dq_list=(3,), m_list=(2,))
        recs = run_bench(settings, SeedStream(9))
        assert len(recs) == 1
        assert recs[0].mape is not None

    def test_deterministic_across_runs(self):
        settings = _small_settings(methods=("dual_dp", "trp", "ts"),
                                   compute_mape=True)
        a = run_bench(settings, SeedStream(7))
        b = run_bench(settings, SeedStream(7))
        assert a == b

    def test_deterministic_across_threads(self):
        settings = _small_settings(methods=BENCH_METHODS, compute_mape=True)
        a = run_bench(settings, SeedStream(7), n_threads=1)
        b = run_bench(settings, SeedStream(7), n_threads=4)
        assert a == b

    def test_plain_int_seed_accepted(self):
        a = run_bench(_small_settings(), 7)
        b = run_bench(_small_settings(), SeedStream(7))
        assert a == b

    def test_median_heuristic_bandwidth_runs(self):
        recs = run_bench(_small_settings(bandwidth="median"), SeedStream(5))
        assert len(recs) == 2

    def test_huge_rfsf_full_width_uses_factorized_gram(self):
        # (2D)^M exceeds the materialization cap; the run must still finish
        # and report the analytic width
        settings = _small_settings(methods=("rfsf_full",), n_list=(3,),
                                   l_list=(4,), dq_list=(16,), m_list=(4,))
        recs = run_bench(settings, SeedStream(5))
        assert recs[0].F == 1 + sum(32 ** m for m in range(1, 5))
        assert recs[0].F > 200_000
        assert recs[0].flop_count > 0


class TestClassifySettings:
    def test_defaults(self):
        s = ClassifySettings()
        assert s.n_per_class == 100
        assert s.n_folds == 3
        assert s.n_seeds == 5

    def test_too_few_per_class_rejected(self):
        with pytest.raises(ValueError, match="too small"):
            ClassifySettings(n_per_class=5, n_folds=3)

    def test_bad_seed_count_rejected(self):
        with pytest.raises(ValueError, match="n_seeds"):
            ClassifySettings(n_seeds=0)


def _classify_settings(**over):
    base = dict(n_per_class=8, length=10, dim=2, drift=2.0, n_levels=2,
                bandwidth=1.0, lambdas=(1e-2, 1.0), n_folds=3, n_seeds=2)
    base.update(over)
    return ClassifySettings(**base)


class TestRunClassify:
    def test_result_structure(self):
        out = run_classify(_classify_settings(), SeedStream(3))
        assert set(out) == {"rows", "median_accuracy"}
        assert len(out["rows"]) == 2
        for s, row in enumerate(out["rows"]):
            assert row["seed_index"] == s
            assert row["best_lambda"] in (1e-2, 1.0)
            assert 0.0 <= row["accuracy"] <= 1.0

    def test_median_recomputed(self):
        out = run_classify(_classify_settings(n_seeds=3), SeedStream(3))
        accs = [r["accuracy"] for r in out["rows"]]
        assert out["median_accuracy"] == np.median(accs)

    def test_deterministic(self):
        a = run_classify(_classify_settings(), SeedStream(3))
        b = run_classify(_classify_settings(), SeedStream(3))
        assert a == b

    def test_deterministic_across_threads(self):
        a = run_classify(_classify_settings(), SeedStream(3), n_threads=1)
        b = run_classify(_classify_settings(), SeedStream(3), n_threads=4)
        assert a == b

    def test_strong_drift_separates(self):
        out = run_classify(_classify_settings(drift=4.0, n_seeds=1),
                           SeedStream(3))
        assert out["median_accuracy"] >= 0.75
