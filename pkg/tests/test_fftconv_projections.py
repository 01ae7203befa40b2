import math
import tracemalloc

import numpy as np
import pytest

from sigkern import (
    ProjectionSpec,
    ProjectionState,
    SeedStream,
    circular_convolve,
    fft_pow2,
    ifft_pow2,
    fit_projection,
    project,
    project_outer,
)
from sigkern.fftconv import _convolve_direct, is_pow2
from sigkern.projections import TYPE1_KINDS, slot_matvec


class TestFft:
    @pytest.mark.parametrize("n", [1, 2, 4, 8, 32, 256, 1024])
    def test_matches_reference_dft(self, n):
        rng = np.random.default_rng(n)
        a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        got = fft_pow2(a)
        want = np.fft.fft(a)
        assert np.allclose(got, want, atol=1e-10 * max(n, 8))

    def test_batched_last_axis(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((3, 2, 16))
        got = fft_pow2(a)
        assert got.shape == (3, 2, 16)
        for i in range(3):
            for j in range(2):
                assert np.allclose(got[i, j], np.fft.fft(a[i, j]), atol=1e-12)

    def test_inverse_roundtrip(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        assert np.allclose(ifft_pow2(fft_pow2(a)), a, atol=1e-12)

    def test_inverse_matches_reference(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        assert np.allclose(ifft_pow2(a), np.fft.ifft(a), atol=1e-12)

    @pytest.mark.parametrize("n", [0, 3, 6, 12, 100])
    def test_rejects_non_pow2(self, n):
        with pytest.raises(ValueError, match="power of two"):
            fft_pow2(np.zeros(n))

    def test_is_pow2(self):
        assert [k for k in range(17) if is_pow2(k)] == [1, 2, 4, 8, 16]


def _conv_oracle(u, v):
    # [DERIVED] direct double sum out_k = sum_j u_j v_{(k-j) mod n}
    n = len(u)
    out = np.zeros(n)
    for k in range(n):
        for j in range(n):
            out[k] += u[j] * v[(k - j) % n]
    return out


class TestCircularConvolve:
    def test_hand_example(self):
        # [DERIVED] (1,2)*(3,4): out_0 = 1*3 + 2*4 = 11, out_1 = 1*4 + 2*3 = 10
        got = circular_convolve([1.0, 2.0], [3.0, 4.0])
        assert np.allclose(got, [11.0, 10.0], atol=1e-12)

    @pytest.mark.parametrize("n", [3, 4])
    def test_delta_identity(self, n):
        delta = np.zeros(n)
        delta[0] = 1.0
        v = np.random.default_rng(n).standard_normal(n)
        assert np.allclose(circular_convolve(delta, v), v, atol=1e-12)

    @pytest.mark.parametrize("n", [5, 6, 8, 16, 64])
    def test_matches_double_sum(self, n):
        rng = np.random.default_rng(n)
        u, v = rng.standard_normal(n), rng.standard_normal(n)
        assert np.allclose(circular_convolve(u, v), _conv_oracle(u, v), atol=1e-10)

    def test_fft_path_agrees_with_direct(self):
        rng = np.random.default_rng(7)
        u, v = rng.standard_normal(64), rng.standard_normal(64)
        fft_path = circular_convolve(u, v)
        direct = _convolve_direct(u, v)
        assert np.max(np.abs(fft_path - direct)) < 1e-8

    def test_commutative(self):
        rng = np.random.default_rng(8)
        u, v = rng.standard_normal(12), rng.standard_normal(12)
        assert np.allclose(circular_convolve(u, v), circular_convolve(v, u), atol=1e-12)

    def test_batched(self):
        rng = np.random.default_rng(9)
        u, v = rng.standard_normal((3, 8)), rng.standard_normal((3, 8))
        got = circular_convolve(u, v)
        for i in range(3):
            assert np.allclose(got[i], circular_convolve(u[i], v[i]), atol=1e-12)

    def test_real_output(self):
        out = circular_convolve(np.ones(4), np.ones(4))
        assert out.dtype == np.float64

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            circular_convolve(np.ones(3), np.ones(4))

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            circular_convolve(np.ones(0), np.ones(0))


class TestProjectionSpec:
    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            ProjectionSpec(kind="rademacher")

    @pytest.mark.parametrize("bad", [0, -1, 1.5])
    def test_rejects_bad_q(self, bad):
        with pytest.raises(ValueError, match="n_components"):
            ProjectionSpec(kind="gaussian", n_components=bad)

    def test_rejects_bad_sparsity(self):
        with pytest.raises(ValueError, match="sparsity"):
            ProjectionSpec(kind="verysparse", sparsity="none")

    @pytest.mark.parametrize("bad", [0, 3])
    def test_rejects_bad_internal_size(self, bad):
        with pytest.raises(ValueError, match="internal_size"):
            ProjectionSpec(kind="diagonal", internal_size=bad)

    def test_type1_rejects_multiple_slots(self):
        with pytest.raises(ValueError, match="n_slots"):
            ProjectionSpec(kind="gaussian", n_slots=2)
        for m in (1, 2, 5):
            assert ProjectionSpec(kind="trp", n_slots=m).n_slots == m


class TestFitProjection:
    def test_gaussian_shape(self):
        state = fit_projection(ProjectionSpec(kind="gaussian", n_components=5), 3,
                               SeedStream(0))
        assert state.slots[0]["Z"].shape == (3, 5)
        assert state.out_dim == 5

    def test_tensor_sketch_tables(self):
        spec = ProjectionSpec(kind="tensor_sketch", n_components=8, n_slots=3)
        state = fit_projection(spec, 4, SeedStream(1))
        assert len(state.slots) == 3
        for payload in state.slots:
            assert payload["h"].shape == (4,)
            assert np.all((payload["h"] >= 0) & (payload["h"] < 8))
            assert set(np.unique(payload["s"])) <= {-1.0, 1.0}
        # slots are mutually independent draws
        assert not np.array_equal(state.slots[0]["h"], state.slots[1]["h"]) or \
            not np.array_equal(state.slots[0]["s"], state.slots[1]["s"])

    @pytest.mark.parametrize("kind", ["gaussian", "subsampling", "verysparse",
                                      "tensor_sketch", "trp"])
    def test_same_seed_same_state(self, kind):
        spec = ProjectionSpec(kind=kind, n_components=4)
        a = fit_projection(spec, 8, SeedStream(7, ("p",)))
        b = fit_projection(spec, 8, SeedStream(7, ("p",)))
        for pa, pb in zip(a.slots, b.slots):
            assert pa.keys() == pb.keys()
            for key in pa:
                assert np.array_equal(pa[key], pb[key])

    @pytest.mark.parametrize("bad", [0, -2, 1.5])
    def test_rejects_bad_dim(self, bad):
        with pytest.raises(ValueError, match="dim"):
            fit_projection(ProjectionSpec(kind="gaussian"), bad, SeedStream(0))

    def test_subsampling_needs_q_at_most_dim(self):
        spec = ProjectionSpec(kind="subsampling", n_components=10)
        with pytest.raises(ValueError, match="n_components"):
            fit_projection(spec, 4, SeedStream(0))

    def test_diagonal_dim_divisibility(self):
        spec = ProjectionSpec(kind="diagonal", internal_size=2)
        with pytest.raises(ValueError, match="divisible"):
            fit_projection(spec, 5, SeedStream(0))

    def test_verysparse_rates(self):
        # [DERIVED] sqrt -> 1/sqrt(d), log -> ln(d)/d
        d = 16
        sq = fit_projection(ProjectionSpec(kind="verysparse", n_components=4,
                                           sparsity="sqrt"), d, SeedStream(2))
        lg = fit_projection(ProjectionSpec(kind="verysparse", n_components=4,
                                           sparsity="log"), d, SeedStream(2))
        assert sq.slots[0]["rate"] == 0.25
        assert lg.slots[0]["rate"] == pytest.approx(math.log(d) / d, rel=1e-15)


class TestProject:
    def test_gaussian_formula(self):
        # [DERIVED] psi(x) = Z^T x / sqrt(Q) from the frozen state
        state = fit_projection(ProjectionSpec(kind="gaussian", n_components=6), 4,
                               SeedStream(3))
        x = np.random.default_rng(0).standard_normal(4)
        want = (x @ state.slots[0]["Z"]) / math.sqrt(6)
        assert np.array_equal(project(state, x), want)

    def test_subsampling_is_scaled_coordinate_pick(self):
        state = fit_projection(ProjectionSpec(kind="subsampling", n_components=3), 8,
                               SeedStream(4))
        x = np.arange(8.0)
        got = project(state, x)
        assert np.allclose(got, math.sqrt(8 / 3) * x[state.slots[0]["idx"]])

    def test_subsampling_full_q_is_permutation(self):
        state = fit_projection(ProjectionSpec(kind="subsampling", n_components=5), 5,
                               SeedStream(5))
        x = np.array([4.0, -1.0, 7.0, 0.5, 2.0])
        got = project(state, x)
        assert sorted(got.tolist()) == sorted(x.tolist())

    def test_verysparse_matches_dense_reconstruction(self):
        # [DERIVED] rebuild the full sparse sign matrix and apply it densely
        spec = ProjectionSpec(kind="verysparse", n_components=4)
        state = fit_projection(spec, 9, SeedStream(6))
        payload = state.slots[0]
        Z = np.zeros((9, 4))
        Z[payload["rows"]] = payload["Zsub"]
        x = np.random.default_rng(1).standard_normal(9)
        want = (x @ Z) / math.sqrt(payload["rate"] * 4)
        assert np.allclose(project(state, x), want, atol=1e-14)

    def test_count_sketch_hand_example(self):
        # [DERIVED] h = (0, 0), s = (+1, -1), x = (3, 4):
        # bucket 0 collects 3 - 4 = -1, bucket 1 stays empty
        spec = ProjectionSpec(kind="tensor_sketch", n_components=2)
        scatter = np.array([[1.0, 0.0], [-1.0, 0.0]])
        state = ProjectionState(spec, 2, 2, [{
            "h": np.array([0, 0]), "s": np.array([1.0, -1.0]), "scatter": scatter,
        }])
        assert np.array_equal(project(state, np.array([3.0, 4.0])), [-1.0, 0.0])

    def test_count_sketch_bucket_sums(self):
        # [DERIVED] CS(x)_j = sum over i with h(i) = j of s(i) x_i
        spec = ProjectionSpec(kind="tensor_sketch", n_components=4)
        state = fit_projection(spec, 10, SeedStream(8))
        x = np.random.default_rng(2).standard_normal(10)
        h, s = state.slots[0]["h"], state.slots[0]["s"]
        want = np.zeros(4)
        for i in range(10):
            want[h[i]] += s[i] * x[i]
        assert np.allclose(project(state, x), want, atol=1e-14)

    def test_trp_formula(self):
        state = fit_projection(ProjectionSpec(kind="trp", n_components=5), 3,
                               SeedStream(9))
        x = np.random.default_rng(3).standard_normal(3)
        want = (x @ state.slots[0]["Z"]) / math.sqrt(5)
        assert np.array_equal(project(state, x), want)

    def test_diagonal_is_identity(self):
        state = fit_projection(ProjectionSpec(kind="diagonal"), 6, SeedStream(0))
        x = np.random.default_rng(4).standard_normal(6)
        assert np.array_equal(project(state, x), x)

    def test_gaussian_preserves_inner_products_at_large_q(self):
        # Johnson-Lindenstrauss style check at Q = 4096
        state = fit_projection(ProjectionSpec(kind="gaussian", n_components=4096), 10,
                               SeedStream(10))
        rng = np.random.default_rng(5)
        x, y = rng.standard_normal(10), rng.standard_normal(10)
        px, py = project(state, x), project(state, y)
        rel = abs(float(px @ py) - float(x @ y)) / (np.linalg.norm(x) * np.linalg.norm(y))
        assert rel < 0.1

    def test_dimension_mismatch(self):
        state = fit_projection(ProjectionSpec(kind="gaussian", n_components=2), 4,
                               SeedStream(0))
        with pytest.raises(ValueError, match="dim=4"):
            project(state, np.zeros(5))


class TestProjectOuter:
    @pytest.mark.parametrize("kind", TYPE1_KINDS)
    def test_type1_equals_projected_kronecker(self, kind):
        # the two-argument form must agree bitwise with psi(kron(u, v))
        du, dv = 2, 3
        spec = ProjectionSpec(kind=kind, n_components=4)
        state = fit_projection(spec, du * dv, SeedStream(11, (kind,)))
        rng = np.random.default_rng(6)
        u, v = rng.standard_normal(du), rng.standard_normal(dv)
        assert np.array_equal(project_outer(state, u, v),
                              project(state, np.kron(u, v)))

    def test_type1_wrong_factor_dims(self):
        state = fit_projection(ProjectionSpec(kind="gaussian", n_components=2), 3,
                               SeedStream(0))
        with pytest.raises(ValueError, match="fitted dim"):
            project_outer(state, np.zeros(2), np.zeros(3))

    def test_trp_hand_example(self):
        # [DERIVED] all-ones Z, Q=1: psi(x) = sum(x), composition multiplies sums
        spec = ProjectionSpec(kind="trp", n_components=1, n_slots=2)
        ones = np.ones((2, 1))
        state = ProjectionState(spec, 2, 1, [{"Z": ones}, {"Z": ones.copy()}])
        x, y = np.array([1.0, 2.0]), np.array([3.0, 4.0])
        u = project(state, x)
        assert u == pytest.approx([3.0])
        assert project_outer(state, u, y, slot=1) == pytest.approx([21.0])

    def test_trp_composition_formula(self):
        spec = ProjectionSpec(kind="trp", n_components=6, n_slots=3)
        state = fit_projection(spec, 4, SeedStream(12))
        rng = np.random.default_rng(7)
        u, v = rng.standard_normal(6), rng.standard_normal(4)
        want = u * (v @ state.slots[2]["Z"])
        assert np.array_equal(project_outer(state, u, v, slot=2), want)

    def test_tensor_sketch_composition_formula(self):
        # conv of the running sketch with the slot's count sketch of v
        spec = ProjectionSpec(kind="tensor_sketch", n_components=8, n_slots=2)
        state = fit_projection(spec, 5, SeedStream(13))
        rng = np.random.default_rng(8)
        u, v = rng.standard_normal(8), rng.standard_normal(5)
        want = circular_convolve(u, v @ state.slots[1]["scatter"])
        assert np.allclose(project_outer(state, u, v, slot=1), want, atol=1e-14)

    def test_diagonal_single_block_kronecker(self):
        # internal_size 2 with one block: scale sqrt(1), plain Kronecker product
        state = fit_projection(ProjectionSpec(kind="diagonal", internal_size=2), 2,
                               SeedStream(0))
        u, v = np.array([1.0, 2.0]), np.array([3.0, 4.0])
        assert np.array_equal(project_outer(state, u, v), np.kron(u, v))

    def test_diagonal_blockwise(self):
        # [DERIVED] d = 3 blocks of size 1: out block i = sqrt(3) u_i v_i
        state = fit_projection(ProjectionSpec(kind="diagonal", internal_size=1), 3,
                               SeedStream(0))
        u, v = np.array([1.0, 2.0, 3.0]), np.array([4.0, 5.0, 6.0])
        want = math.sqrt(3) * u * v
        assert np.allclose(project_outer(state, u, v), want, atol=1e-14)

    def test_diagonal_growing_blocks(self):
        # [DERIVED] d = 2 blocks; u carries 2 slots per block, v carries 1;
        # output block i is sqrt(2) * outer(u_i, v_i) flattened
        state = fit_projection(ProjectionSpec(kind="diagonal", internal_size=2), 4,
                               SeedStream(0))
        u = np.array([1.0, 2.0, 3.0, 4.0])  # blocks (1,2), (3,4)
        v = np.array([5.0, 6.0])  # blocks (5,), (6,)
        want = math.sqrt(2) * np.array([5.0, 10.0, 18.0, 24.0])
        assert np.allclose(project_outer(state, u, v), want, atol=1e-14)

    def test_slot_exhaustion(self):
        spec = ProjectionSpec(kind="trp", n_components=3, n_slots=2)
        state = fit_projection(spec, 2, SeedStream(14))
        with pytest.raises(ValueError, match="n_slots"):
            project_outer(state, np.zeros(3), np.zeros(2), slot=2)

    def test_type2_shape_mismatch(self):
        spec = ProjectionSpec(kind="trp", n_components=3, n_slots=2)
        state = fit_projection(spec, 2, SeedStream(15))
        with pytest.raises(ValueError, match="left operand"):
            project_outer(state, np.zeros(4), np.zeros(2), slot=1)
        with pytest.raises(ValueError, match="right operand"):
            project_outer(state, np.zeros(3), np.zeros(5), slot=1)

    @pytest.mark.parametrize("kind", ["subsampling", "verysparse"])
    def test_sparse_outer_never_materializes_kronecker(self, kind):
        # structural bound: peak allocation inside project_outer stays well
        # under the du * dv doubles a materialized Kronecker product needs
        du = dv = 1000
        spec = ProjectionSpec(kind=kind, n_components=8)
        state = fit_projection(spec, du * dv, SeedStream(16, (kind,)))
        rng = np.random.default_rng(9)
        u, v = rng.standard_normal(du), rng.standard_normal(dv)
        tracemalloc.start()
        project_outer(state, u, v)
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        assert peak < du * dv * 8 / 4


class TestSlotMatvec:
    def test_trp_is_unscaled(self):
        spec = ProjectionSpec(kind="trp", n_components=4, n_slots=2)
        state = fit_projection(spec, 3, SeedStream(17))
        x = np.random.default_rng(10).standard_normal((5, 3))
        assert np.array_equal(slot_matvec(state, x, 1), x @ state.slots[1]["Z"])

    def test_tensor_sketch(self):
        spec = ProjectionSpec(kind="tensor_sketch", n_components=4, n_slots=2)
        state = fit_projection(spec, 3, SeedStream(18))
        x = np.random.default_rng(11).standard_normal((5, 3))
        assert np.array_equal(slot_matvec(state, x, 0), x @ state.slots[0]["scatter"])

    def test_rejects_other_kinds(self):
        state = fit_projection(ProjectionSpec(kind="gaussian", n_components=4), 3,
                               SeedStream(19))
        with pytest.raises(ValueError, match="trp/tensor_sketch"):
            slot_matvec(state, np.zeros(3), 0)


def _mc_inner(kind, m, n_trials, root):
    # composed projection of x_1 (x) ... (x) x_m against the same for y
    rng = np.random.default_rng(100 + m)
    d, Q = 3, 16
    xs = rng.standard_normal((m, d))
    ys = rng.standard_normal((m, d))
    target = float(np.prod([xs[i] @ ys[i] for i in range(m)]))
    spec = ProjectionSpec(kind=kind, n_components=Q, n_slots=m)
    vals = np.empty(n_trials)
    for t in range(n_trials):
        state = fit_projection(spec, d, root.child(f"t{t}"))
        px, py = project(state, xs[0]), project(state, ys[0])
        for j in range(1, m):
            px = project_outer(state, px, xs[j], slot=j)
            py = project_outer(state, py, ys[j], slot=j)
        vals[t] = float(px @ py)
    return vals, target


class TestUnbiasedness:
    @pytest.mark.parametrize("kind", TYPE1_KINDS)
    def test_type1_vector(self, kind):
        # E <psi(x), psi(y)> = <x, y> over independent fits
        rng = np.random.default_rng(20)
        d, Q = 8, 4  # Q < d so subsampling is a genuine estimator
        x, y = rng.standard_normal(d), rng.standard_normal(d)
        spec = ProjectionSpec(kind=kind, n_components=Q)
        root = SeedStream(33, (kind,))
        vals = np.empty(600)
        for t in range(600):
            state = fit_projection(spec, d, root.child(f"t{t}"))
            vals[t] = float(project(state, x) @ project(state, y))
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean() - float(x @ y)) < 4.0 * se

    @pytest.mark.parametrize("kind", ["trp", "tensor_sketch"])
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_type2_composition(self, kind, m):
        # E <P(x_1 (x) .. (x) x_m), P(y_1 (x) .. (x) y_m)> = prod_i <x_i, y_i>
        vals, target = _mc_inner(kind, m, 1500, SeedStream(44, (kind, f"m{m}")))
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean() - target) < 4.0 * se
