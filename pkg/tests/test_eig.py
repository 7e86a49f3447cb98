import numpy as np
import pytest

from lapcert import (
    SymmetricMatrix,
    eigendecompose,
    eigenvalue_k,
    eigenvalues_selected,
    spectral_norm,
    tridiagonalize,
)
from lapcert.eig import _ql_implicit
from lapcert.errors import IndexOutOfRange, NonConvergence

from _oracles import charpoly_bisect_eigs, lapack_eigs, power_iteration_norm

PATH3 = np.array([[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]])


def sym(a):
    return SymmetricMatrix(np.asarray(a, dtype=np.float64))


def random_sym(rng, n, scale=1.0):
    b = rng.standard_normal((n, n)) * scale
    return SymmetricMatrix(b + b.T)


class TestSymmetricMatrix:
    def test_mirror_reads_bit_identical(self):
        rng = np.random.default_rng(0)
        m = random_sym(rng, 12)
        a = m.array
        for i in range(12):
            for j in range(12):
                assert a[i, j] == a[j, i]

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            SymmetricMatrix(np.array([[0.0, 1.0], [2.0, 0.0]]))

    def test_symmetrize_averages(self):
        m = SymmetricMatrix(np.array([[0.0, 1.0], [3.0, 0.0]]), symmetrize=True)
        assert m.array[0, 1] == m.array[1, 0] == 2.0

    def test_rejects_nan_and_inf(self):
        with pytest.raises(ValueError):
            SymmetricMatrix(np.array([[np.nan]]))
        with pytest.raises(ValueError):
            SymmetricMatrix(np.array([[0.0, np.inf], [np.inf, 0.0]]))

    def test_backing_array_readonly(self):
        m = sym([[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ValueError):
            m.array[0, 0] = 5.0

    def test_from_upper_round_trip(self):
        vals = np.arange(6, dtype=float)
        m = SymmetricMatrix.from_upper(3, vals)
        assert m.array[0, 2] == m.array[2, 0] == 2.0
        assert m.array[1, 1] == 3.0


class TestTridiagonalize:
    def test_one_by_one(self):
        tri = tridiagonalize(sym([[5.0]]))
        assert tri.diag.tolist() == [5.0]
        assert tri.offdiag.size == 0

    def test_diagonal_matrix_fixed_point(self):
        tri = tridiagonalize(sym(np.diag([1.0, 2.0, 3.0])))
        assert tri.diag.tolist() == [1.0, 2.0, 3.0]
        assert tri.offdiag.tolist() == [0.0, 0.0]

    def test_random_6x6_matches_charpoly_oracle(self):
        rng = np.random.default_rng(7)
        m = random_sym(rng, 6)
        tri = tridiagonalize(m)
        t = np.diag(tri.diag) + np.diag(tri.offdiag, 1) + np.diag(tri.offdiag, -1)
        got = np.sort(charpoly_bisect_eigs(t))
        want = charpoly_bisect_eigs(m.array)
        scale = 1.0 + np.max(np.abs(want))
        assert np.max(np.abs(got - want)) <= 1e-10 * scale

    @pytest.mark.parametrize("n", [2, 3, 5, 16, 33, 50, 90])
    def test_reconstruction_with_q(self, n):
        rng = np.random.default_rng(n)
        m = random_sym(rng, n)
        tri = tridiagonalize(m, want_q=True)
        t = np.diag(tri.diag)
        if n > 1:
            t += np.diag(tri.offdiag, 1) + np.diag(tri.offdiag, -1)
        rec = tri.q_accum @ t @ tri.q_accum.T
        tol = 1e-10 * n * (1.0 + np.max(np.abs(m.array)))
        assert np.max(np.abs(rec - m.array)) <= tol
        ortho = tri.q_accum @ tri.q_accum.T - np.eye(n)
        assert np.max(np.abs(ortho)) <= 1e-12 * n

    def test_spectrum_preserved_across_block_boundaries(self):
        # sizes straddling the panel width
        rng = np.random.default_rng(3)
        for n in (31, 32, 33, 65, 130):
            m = random_sym(rng, n)
            tri = tridiagonalize(m)
            t = np.diag(tri.diag) + np.diag(tri.offdiag, 1) + np.diag(tri.offdiag, -1)
            err = np.max(np.abs(lapack_eigs(t) - lapack_eigs(m.array)))
            assert err <= 1e-10 * (1.0 + spectral_norm(m))


class TestEigendecompose:
    def test_identity(self):
        spec = eigendecompose(sym(np.eye(4)))
        assert np.allclose(spec.eigenvalues, np.ones(4), atol=0)

    def test_path_laplacian_exact(self):
        # characteristic polynomial x(x-1)(x-3)
        spec = eigendecompose(sym(PATH3))
        assert np.max(np.abs(spec.eigenvalues - [0.0, 1.0, 3.0])) < 1e-12

    def test_complete_graph_laplacian(self):
        n = 4
        m = sym(n * np.eye(n) - np.ones((n, n)))
        spec = eigendecompose(m)
        assert np.max(np.abs(spec.eigenvalues - [0.0, 4.0, 4.0, 4.0])) < 1e-12

    def test_deterministic(self):
        rng = np.random.default_rng(11)
        m = random_sym(rng, 20)
        a = eigendecompose(m, want_vectors=True)
        b = eigendecompose(m, want_vectors=True)
        assert np.array_equal(a.eigenvalues, b.eigenvalues)
        assert np.array_equal(a.eigenvectors, b.eigenvectors)

    def test_nonconvergence_raises(self):
        d = [0.0, 1.0, 2.0]
        e = [0.5, 0.5, 0.0]
        with pytest.raises(NonConvergence):
            _ql_implicit(d, e, None, max_sweeps=0)

    def test_spectrum_invariants_random(self):
        rng = np.random.default_rng(42)
        for trial in range(1000):
            n = int(rng.integers(1, 51))
            m = random_sym(rng, n)
            spec = eigendecompose(m, want_vectors=True)
            vals, vecs = spec.eigenvalues, spec.eigenvectors
            norm = 1.0 + np.max(np.abs(vals))
            assert np.all(np.diff(vals) >= 0)
            # trace preservation
            assert abs(vals.sum() - np.trace(m.array)) <= 1e-10 * n * norm
            # residual and orthogonality
            assert spec.residual <= 1e-10 * norm
            gram = vecs.T @ vecs - np.eye(n)
            assert np.max(np.abs(gram)) <= 1e-10

    def test_conjugation_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            n = int(rng.integers(2, 40))
            m = random_sym(rng, n)
            s = np.where(rng.random(n) < 0.5, 1.0, -1.0)
            conj = SymmetricMatrix(s[:, None] * m.array * s[None, :])
            a = eigendecompose(m).eigenvalues
            b = eigendecompose(conj).eigenvalues
            assert np.max(np.abs(a - b)) <= 1e-10 * (1.0 + spectral_norm(m))


class TestEigenvalueK:
    def test_path_laplacian_second(self):
        assert abs(eigenvalue_k(sym(PATH3), 2) - 1.0) < 1e-10

    def test_graph_laplacian_first_is_zero(self):
        rng = np.random.default_rng(1)
        a = (rng.random((12, 12)) < 0.4).astype(float)
        a = np.triu(a, 1)
        a = a + a.T
        l = np.diag(a.sum(axis=1)) - a
        assert abs(eigenvalue_k(sym(l), 1)) <= 1e-10 * (1 + 12 * np.max(np.abs(l)))

    def test_two_community_certificate_matrix(self):
        # two disjoint edges, labels split: lambda_2 of 2(D+ - D- - A) + J
        from lapcert import derive_stream, partition_gap_matrix, sample_sbm

        g = sample_sbm(4, 1.0, 0.0, derive_stream(0, 0))
        cert = sym(2.0 * partition_gap_matrix(g).array + 1.0)
        assert eigenvalue_k(cert, 2) == pytest.approx(4.0, abs=1e-10)

    def test_index_out_of_range(self):
        m = sym(np.eye(3))
        with pytest.raises(IndexOutOfRange):
            eigenvalue_k(m, 0)
        with pytest.raises(IndexOutOfRange):
            eigenvalue_k(m, 4)

    def test_agrees_with_full_decomposition(self):
        rng = np.random.default_rng(9)
        for _ in range(60):
            n = int(rng.integers(1, 31))
            m = random_sym(rng, n)
            full = eigendecompose(m).eigenvalues
            ks = list(range(1, n + 1))
            picked = eigenvalues_selected(m, ks)
            tol = 1e-10 * (1.0 + spectral_norm(m))
            assert np.max(np.abs(full - picked)) <= tol

    def test_multiplicity_handling(self):
        m = sym(np.diag([2.0, 2.0, 2.0, 7.0]))
        for k in (1, 2, 3):
            assert abs(eigenvalue_k(m, k) - 2.0) < 1e-10
        assert abs(eigenvalue_k(m, 4) - 7.0) < 1e-10


class TestSpectralNorm:
    def test_swap_matrix(self):
        assert abs(spectral_norm(sym([[0.0, 1.0], [1.0, 0.0]])) - 1.0) < 1e-12

    def test_zero_matrix(self):
        assert spectral_norm(sym(np.zeros((3, 3)))) == pytest.approx(0.0, abs=1e-12)

    def test_against_power_iteration(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = int(rng.integers(2, 40))
            m = random_sym(rng, n)
            ref = power_iteration_norm(m.array)
            assert spectral_norm(m) == pytest.approx(ref, rel=1e-6, abs=1e-9)


@pytest.mark.slow
def test_wigner_norm_concentration():
    # ||W|| ~ 2 sqrt(n): inside [1.8, 2.2] sqrt(n) for 19 of 20 seeds
    from lapcert import derive_stream, sample_wigner

    n = 500
    hits = 0
    for seed in range(20):
        w = sample_wigner(n, derive_stream(1000 + seed, 0))
        norm = spectral_norm(w)
        if 1.8 * np.sqrt(n) <= norm <= 2.2 * np.sqrt(n):
            hits += 1
    assert hits >= 19
