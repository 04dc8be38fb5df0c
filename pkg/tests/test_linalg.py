import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knockoffs.exceptions import NotPositiveDefiniteError, RankDeficientError
from knockoffs.linalg import (
    check_orthonormal,
    check_symmetric,
    gram,
    min_eig,
    null_complement,
    solve_spd,
    thin_svd,
)


class TestGram:
    def test_identity(self):
        assert np.array_equal(gram(np.eye(3)), np.eye(3))

    def test_duplicate_columns(self):
        col = np.array([3.0, 4.0]) / 5.0
        x = np.column_stack([col, col])
        g = gram(x)
        assert g[0, 1] == pytest.approx(1.0)

    def test_two_column_inner_products(self):
        # columns e1 and (e1+e2)/sqrt(2): off-diagonal is 1/sqrt(2)
        x = np.zeros((4, 2))
        x[0, 0] = 1.0
        x[0, 1] = x[1, 1] = 1.0 / np.sqrt(2.0)
        expected = np.array([[1.0, 1.0 / np.sqrt(2.0)], [1.0 / np.sqrt(2.0), 1.0]])
        assert np.abs(gram(x) - expected).max() < 1e-15

    def test_exactly_symmetric(self):
        x = np.random.default_rng(0).standard_normal((40, 7))
        g = gram(x)
        assert np.array_equal(g, g.T)

    def test_rejects_nonfinite(self):
        x = np.ones((3, 2))
        x[0, 0] = np.nan
        with pytest.raises(ValueError):
            gram(x)


class TestMinEig:
    def test_identity(self):
        assert min_eig(np.eye(3)) == pytest.approx(1.0)

    def test_two_by_two_correlation(self):
        rho = 0.5
        s = np.array([[1.0, rho], [rho, 1.0]])
        # eigenvalues are 1 +- rho
        assert min_eig(s) == pytest.approx(1.0 - rho, abs=1e-12)

    def test_diagonal(self):
        assert min_eig(np.diag([3.0, 1.0, 2.0])) == pytest.approx(1.0)

    def test_rayleigh_bound_below_diagonal(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = rng.standard_normal((6, 6))
            s = (a + a.T) / 2.0
            assert min_eig(s) <= np.diag(s).min() + 1e-12


class TestNullComplement:
    def test_coordinate_subspace(self):
        x = np.zeros((4, 2))
        x[0, 0] = x[1, 1] = 1.0
        u = null_complement(x, 2)
        check_orthonormal(u)
        # spans {e3, e4}: first two rows vanish
        assert np.abs(u[:2, :]).max() < 1e-12

    def test_empty_basis(self):
        x = np.linalg.qr(np.random.default_rng(0).standard_normal((5, 3)))[0]
        u = null_complement(x, 0)
        assert u.shape == (5, 0)

    def test_full_complement_property(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal((30, 8))
        u = null_complement(x, 30 - 8)
        assert np.abs(u.T @ x).max() < 1e-10
        assert np.abs(u.T @ u - np.eye(22)).max() < 1e-10

    def test_deterministic(self):
        x = np.random.default_rng(3).standard_normal((20, 5))
        u1 = null_complement(x, 15)
        u2 = null_complement(x.copy(), 15)
        assert np.array_equal(u1, u2)

    def test_rank_deficient_raises(self):
        x = np.ones((6, 2))
        with pytest.raises(RankDeficientError):
            null_complement(x, 3)

    def test_too_many_columns_requested(self):
        x = np.random.default_rng(0).standard_normal((6, 3))
        with pytest.raises(ValueError):
            null_complement(x, 4)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 10), st.integers(0, 1000))
    def test_orthogonality_random(self, p, seed):
        n = 3 * p
        x = np.random.default_rng(seed).standard_normal((n, p))
        u = null_complement(x, n - p)
        assert np.abs(u.T @ x).max() < 1e-10
        assert np.abs(u.T @ u - np.eye(n - p)).max() < 1e-10


class TestSolveSpd:
    def test_identity(self):
        assert np.allclose(solve_spd(np.eye(2), np.array([1.0, 2.0])), [1.0, 2.0])

    def test_diagonal(self):
        assert np.allclose(solve_spd(np.diag([2.0, 4.0]), np.array([2.0, 4.0])), [1.0, 1.0])

    def test_hand_solve(self):
        s = np.array([[2.0, 1.0], [1.0, 2.0]])
        assert np.allclose(solve_spd(s, np.array([3.0, 3.0])), [1.0, 1.0])

    def test_not_pd_raises(self):
        with pytest.raises(NotPositiveDefiniteError):
            solve_spd(np.array([[1.0, 2.0], [2.0, 1.0]]), np.ones(2))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 1000))
    def test_residual_round_trip(self, p, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((p + 5, p))
        s = a.T @ a + 0.1 * np.eye(p)
        b = rng.standard_normal(p)
        x = solve_spd(s, b)
        assert np.linalg.norm(s @ x - b) / np.linalg.norm(b) < 1e-10


class TestThinSvd:
    def test_identity(self):
        _, d, _ = thin_svd(np.eye(2))
        assert np.allclose(d, [1.0, 1.0])

    def test_single_scaled_column(self):
        a = np.zeros((4, 1))
        a[0, 0] = 2.0
        u, d, v = thin_svd(a)
        assert d[0] == pytest.approx(2.0)
        assert abs(abs(u[0, 0]) - 1.0) < 1e-14

    def test_rank_one_outer_product(self):
        rng = np.random.default_rng(11)
        u_vec = rng.standard_normal(8)
        v_vec = rng.standard_normal(3)
        a = np.outer(u_vec, v_vec)
        _, d, _ = thin_svd(a)
        assert d[0] == pytest.approx(np.linalg.norm(u_vec) * np.linalg.norm(v_vec), rel=1e-12)
        assert np.abs(d[1:]).max() < 1e-12

    def test_reconstruction_and_ordering(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((20, 6))
        u, d, v = thin_svd(a)
        assert np.all(np.diff(d) <= 0) and np.all(d >= 0)
        rel = np.linalg.norm(u @ np.diag(d) @ v.T - a) / np.linalg.norm(a)
        assert rel < 1e-9
        check_orthonormal(u)
        check_orthonormal(v)

    def test_wide_matrix_rejected(self):
        with pytest.raises(ValueError):
            thin_svd(np.ones((2, 5)))


def test_check_symmetric_rejects_asymmetry():
    with pytest.raises(ValueError):
        check_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))
