import numpy as np
import pytest

from knockoffs.construct import SMethod, SVector, build_knockoff, s_modified_sdp, swap_pairs
from knockoffs.exceptions import (
    InvalidWeightError,
    NoComplementError,
    SingularGramError,
)
from knockoffs.linalg import gram
from knockoffs.selection import Offset, knockoff_threshold
from knockoffs.simlab import DesignKind, DesignSpec, gen_design
from knockoffs.stats import (
    Combiner,
    PathConfig,
    StatKind,
    compute_stat,
    estimate_sigma,
    half_lasso,
    half_lasso_sigma_scaled,
    neg_half_lasso,
    soft_threshold,
    stat_forward_selection,
    stat_lasso_path,
    stat_least_squares,
    stat_marginal_corr,
    stat_omp,
    weighted_half_lasso,
)

from oracles import fista_half_penalized, lars_entry_values


def unit_design(n, p, seed):
    x = np.random.default_rng(seed).standard_normal((n, p))
    return x / np.linalg.norm(x, axis=0)


def seeded_model(n=48, p=6, seed=0):
    x = unit_design(n, p, seed)
    return build_knockoff(x, s_modified_sdp(gram(x), 0.5, 0.75))


def orthonormal_model(n=30, p=5, seed=0):
    q = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, p)))[0]
    return build_knockoff(q, SVector(np.ones(p), SMethod.EQUIVARIANT))


class TestMarginalCorr:
    def test_orthogonal_response_gives_zero(self):
        model = seeded_model()
        y = model.U @ np.arange(1.0, model.U.shape[1] + 1.0)
        assert np.abs(stat_marginal_corr(model, y).w).max() < 1e-10

    def test_orthonormal_design_unit_signal(self):
        model = orthonormal_model()
        w = stat_marginal_corr(model, model.X[:, 0]).w
        assert w[0] == pytest.approx(1.0, abs=1e-10)
        assert np.abs(w[1:]).max() < 1e-10

    def test_two_block_sign_flip_values(self):
        # deterministic two-block design with exact +-1/2 correlations;
        # s = 1 is exact, beta = (0.9 on A, 1.0 on B), no noise: the
        # alternating sign effect gives W = +0.9 on A and -1 on B exactly
        spec = DesignSpec(DesignKind.EXPLICIT_SIGN, 49, (16, 8), rho=0.5)
        x = gen_design(spec)
        model = build_knockoff(x, SVector(np.ones(24), SMethod.EQUIVARIANT))
        beta = np.concatenate([np.full(16, 0.9), np.full(8, 1.0)])
        w = stat_marginal_corr(model, x @ beta).w
        assert np.abs(w[:16] - 0.9).max() < 1e-8
        assert np.abs(w[16:] + 1.0).max() < 1e-8


class TestLeastSquares:
    def test_noiseless_recovers_beta(self):
        model = seeded_model()
        beta = np.array([3.0, -2.0, 0.0, 1.0, 0.0, 0.5])
        w = stat_least_squares(model, model.X @ beta).w
        assert np.abs(w - np.abs(beta)).max() < 1e-8

    def test_zero_response(self):
        model = seeded_model()
        assert np.abs(stat_least_squares(model, np.zeros(model.n)).w).max() == 0.0

    def test_block_form_matches_direct_solve(self):
        model = seeded_model(n=60, p=8, seed=3)
        rng = np.random.default_rng(5)
        y = rng.standard_normal(60)
        a = np.hstack([model.X, model.Xtilde])
        coef = np.linalg.lstsq(a, y, rcond=None)[0]
        direct = np.abs(coef[:8]) - np.abs(coef[8:])
        assert np.abs(stat_least_squares(model, y).w - direct).max() < 1e-8

    def test_zero_s_rejected(self):
        x = unit_design(40, 5, 1)
        model = build_knockoff(x, np.array([0.5, 0.0, 0.5, 0.5, 0.5]))
        with pytest.raises(SingularGramError) as err:
            stat_least_squares(model, np.ones(40))
        assert "s" in err.value.block


class TestHalfLasso:
    def test_zero_penalty_is_least_squares(self):
        model = seeded_model()
        y = np.random.default_rng(2).standard_normal(model.n)
        sol = half_lasso(model, y, 0.0)
        ls = stat_least_squares(model, y, Combiner.DIFFERENCE)
        assert np.abs(sol.stat(StatKind.HALF_LASSO, Combiner.DIFFERENCE).w - ls.w).max() < 1e-12

    def test_hand_computed_shrinkage(self):
        # orthogonal design, s = 1, beta_1 = 3, no noise, lam = 0.5:
        # Sh(3, 1) = 2 so beta_hat = 2.5, beta_tilde = 0.5, W_diff = 2
        model = orthonormal_model()
        beta = np.array([3.0, 0.0, 0.0, 0.0, 0.0])
        sol = half_lasso(model, model.X @ beta, 0.5)
        assert sol.beta_hat[0] == pytest.approx(2.5, abs=1e-10)
        assert sol.beta_tilde[0] == pytest.approx(0.5, abs=1e-10)
        w = sol.stat(StatKind.HALF_LASSO, Combiner.DIFFERENCE).w
        assert w[0] == pytest.approx(2.0, abs=1e-10)

    def test_small_signal_fully_shrunk(self):
        model = orthonormal_model()
        beta = np.array([1.0, 0.0, 0.0, 0.0, 0.0])
        sol = half_lasso(model, model.X @ beta, 1.0)  # |beta| <= 2*lam/s
        assert np.abs(sol.beta_hat - sol.beta_tilde).max() < 1e-12
        assert np.abs(sol.stat(StatKind.HALF_LASSO, Combiner.SIGNED_MAX).w).max() == 0.0

    def test_matches_prox_gradient_oracle(self):
        model = seeded_model(n=40, p=5, seed=7)
        rng = np.random.default_rng(8)
        y = model.X @ np.array([2.0, -1.0, 0.0, 0.5, 0.0]) + 0.3 * rng.standard_normal(40)
        for lam in (0.1, 0.7):
            sol = half_lasso(model, y, lam)
            bh, bt = fista_half_penalized(model.X, model.Xtilde, y, lam)
            assert np.abs(sol.beta_hat - bh).max() < 1e-6
            assert np.abs(sol.beta_tilde - bt).max() < 1e-6

    def test_sign_lemma(self):
        model = seeded_model(n=60, p=8, seed=11)
        rng = np.random.default_rng(12)
        from knockoffs.stats import _ls_split

        for trial in range(20):
            y = rng.standard_normal(60)
            lam = rng.uniform(0.0, 1.0)
            sol = half_lasso(model, y, lam)
            _, a_diff = _ls_split(model, y)
            diff = sol.beta_hat - sol.beta_tilde
            ok = (np.sign(diff) == np.sign(a_diff)) | (diff == 0.0)
            assert np.all(ok)


class TestWeightedHalfLasso:
    def test_unit_weights_match_plain(self):
        model = seeded_model()
        y = np.random.default_rng(3).standard_normal(model.n)
        plain = half_lasso(model, y, 0.4)
        weighted = weighted_half_lasso(model, y, 0.4, np.ones(model.p))
        assert np.allclose(plain.beta_hat, weighted.beta_hat)
        assert np.allclose(plain.beta_tilde, weighted.beta_tilde)

    def test_default_weights_positive_signal(self):
        model = seeded_model()
        beta = np.zeros(model.p)
        beta[0] = 25.0
        sol = weighted_half_lasso(model, model.X @ beta, 0.5)
        w = sol.stat(StatKind.WEIGHTED_HALF_LASSO, Combiner.SIGNED_MAX).w
        assert w[0] > 0

    def test_matches_prox_gradient_oracle(self):
        model = seeded_model(n=40, p=5, seed=9)
        rng = np.random.default_rng(10)
        y = model.X @ np.array([3.0, 0.0, -2.0, 0.0, 1.0]) + 0.2 * rng.standard_normal(40)
        z = np.sqrt(model.s.s / 2.0)
        sol = weighted_half_lasso(model, y, 0.5, z)
        bh, bt = fista_half_penalized(model.X, model.Xtilde, y, 0.5, z=z)
        assert np.abs(sol.beta_hat - bh).max() < 1e-6
        assert np.abs(sol.beta_tilde - bt).max() < 1e-6

    def test_rejects_nonpositive_weights(self):
        model = seeded_model()
        with pytest.raises(InvalidWeightError):
            weighted_half_lasso(model, np.ones(model.n), 0.5, np.zeros(model.p))


class TestNegHalfLasso:
    def test_zero_penalty_is_least_squares(self):
        model = seeded_model()
        y = np.random.default_rng(4).standard_normal(model.n)
        sol = neg_half_lasso(model, y, 0.0)
        ls = stat_least_squares(model, y, Combiner.DIFFERENCE)
        assert np.abs(sol.stat(StatKind.NEG_HALF_LASSO, Combiner.DIFFERENCE).w - ls.w).max() < 1e-12

    def test_noiseless_expansion_values(self):
        # mu = s, beta_1 > 0, no noise: beta_hat = beta + lam, beta_tilde = -lam
        model = orthonormal_model()
        beta = np.array([2.0, 0.0, 0.0, 0.0, 0.0])
        lam = 0.3
        sol = neg_half_lasso(model, model.X @ beta, lam, mu=model.s.s)
        assert sol.beta_hat[0] == pytest.approx(2.0 + lam, abs=1e-10)
        assert sol.beta_tilde[0] == pytest.approx(-lam, abs=1e-10)

    def test_gap_never_shrinks(self):
        model = seeded_model()
        y = np.random.default_rng(6).standard_normal(model.n)
        ls_sol = half_lasso(model, y, 0.0)
        neg_sol = neg_half_lasso(model, y, 0.4)
        gap_ls = np.abs(ls_sol.beta_hat - ls_sol.beta_tilde)
        gap_neg = np.abs(neg_sol.beta_hat - neg_sol.beta_tilde)
        assert np.all(gap_neg >= gap_ls - 1e-12)


class TestNoiseEstimate:
    def test_arithmetic(self):
        model = seeded_model(n=16, p=6, seed=1)  # dof = 4
        y = model.U @ np.ones(4)
        est = estimate_sigma(model, y)
        assert est.dof == 4
        assert est.sigma_hat == pytest.approx(1.0, abs=1e-12)

    def test_zero_for_span_response(self):
        model = seeded_model()
        y = model.X @ np.ones(model.p) + model.Xtilde @ np.ones(model.p)
        assert estimate_sigma(model, y).sigma_hat < 1e-10

    def test_swap_invariance_exact(self):
        model = seeded_model()
        y = np.random.default_rng(7).standard_normal(model.n)
        base = estimate_sigma(model, y).sigma_hat
        for j in range(model.p):
            swapped = swap_pairs(model, j)
            assert estimate_sigma(swapped, y).sigma_hat == base

    def test_chi_square_mean(self):
        model = seeded_model(n=62, p=6, seed=13)  # dof = 50
        rng = np.random.default_rng(14)
        dof = model.U.shape[1]
        vals = []
        for _ in range(300):
            y = 2.0 * rng.standard_normal(model.n)
            vals.append(estimate_sigma(model, y).sigma_hat ** 2 * dof / 4.0)
        se = np.sqrt(2.0 * dof) / np.sqrt(300)
        assert abs(np.mean(vals) - dof) < 4 * se

    def test_no_complement_rejected(self):
        x = unit_design(12, 6, 3)
        model = build_knockoff(x, s_modified_sdp(gram(x), 0.5, 0.75))
        with pytest.raises(NoComplementError):
            estimate_sigma(model, np.ones(12))


class TestSigmaScaledHalfLasso:
    def test_matches_explicit_penalty(self):
        model = seeded_model()
        y = np.random.default_rng(8).standard_normal(model.n)
        sigma_hat = estimate_sigma(model, y).sigma_hat
        a = half_lasso_sigma_scaled(model, y, 1.3)
        b = half_lasso(model, y, 1.3 * sigma_hat)
        assert np.array_equal(a.beta_hat, b.beta_hat)
        assert np.array_equal(a.beta_tilde, b.beta_tilde)

    def test_noiseless_span_response_is_least_squares(self):
        model = seeded_model()
        beta = np.arange(1.0, model.p + 1.0)
        y = model.X @ beta
        sol = half_lasso_sigma_scaled(model, y, 1.0)
        assert np.abs((sol.beta_hat - beta)).max() < 1e-6
        assert np.abs(sol.beta_tilde).max() < 1e-6


class TestLassoPath:
    def test_orthonormal_entries_match_correlations(self):
        model = orthonormal_model(n=40, p=5, seed=2)
        rng = np.random.default_rng(3)
        y = model.X @ np.array([5.0, -3.0, 2.0, 0.0, 0.0]) + 0.05 * rng.standard_normal(40)
        cfg = PathConfig(1000, 1e-3)
        w = stat_lasso_path(model, y, cfg).w
        c = np.abs(model.X.T @ y)
        step = cfg.lambda_min_ratio ** (1.0 / (cfg.num_lambda - 1))
        for j in range(3):
            assert w[j] > 0
            assert c[j] * step * step < w[j] <= c[j] * (1 + 1e-12)

    def test_zero_response(self):
        model = seeded_model()
        w = stat_lasso_path(model, np.zeros(model.n)).w
        assert np.abs(w).max() == 0.0

    def test_matches_lars_homotopy_within_one_step(self):
        model = seeded_model(n=60, p=5, seed=21)
        rng = np.random.default_rng(22)
        y = model.X @ np.array([4.0, -3.0, 2.5, 1.5, 2.0]) + 0.2 * rng.standard_normal(60)
        a = np.hstack([model.X, model.Xtilde])
        exact = lars_entry_values(a, y)
        cfg = PathConfig(1000, 1e-3)
        from knockoffs.stats import _kernels

        c0 = a.T @ y
        g = gram(a)
        entry, fail = _kernels.lasso_entry_grid(
            np.ascontiguousarray(g),
            np.ascontiguousarray(c0 / np.linalg.norm(y)),
            np.ascontiguousarray(np.diag(g)),
            np.ascontiguousarray(cfg.grid(np.abs(c0 / np.linalg.norm(y)).max())),
            1e-7,
            10_000,
        )
        assert fail == -1
        entry = entry * np.linalg.norm(y)
        step = cfg.lambda_min_ratio ** (1.0 / (cfg.num_lambda - 1))
        for j in range(10):
            if exact[j] <= 0:
                continue
            # grid entry is the first grid point at/below the exact knot
            assert entry[j] <= exact[j] * (1.0 + 1e-9)
            assert entry[j] >= exact[j] * step * step * (1.0 - 1e-9)

    def test_scale_equivariance(self):
        model = seeded_model(n=40, p=5, seed=31)
        y = np.random.default_rng(32).standard_normal(40)
        w1 = stat_lasso_path(model, y).w
        w2 = stat_lasso_path(model, 100.0 * y).w
        assert np.allclose(w2, 100.0 * w1, rtol=1e-10, atol=1e-12)


class TestForwardSelection:
    def test_orthonormal_entry_order(self):
        model = orthonormal_model(n=40, p=4, seed=4)
        y = model.X @ np.array([4.0, 1.0, -2.0, 0.5])
        w = stat_forward_selection(model, y)
        a = np.hstack([model.X, model.Xtilde])
        corr = np.abs(a.T @ y)
        order = np.argsort(-corr)
        z = np.zeros(8)
        z[order] = np.arange(8, 0, -1)
        expected = np.maximum(z[:4], z[4:]) * np.sign(z[:4] - z[4:])
        assert np.array_equal(w.w, expected)

    def test_zero_response_selects_nothing(self):
        model = seeded_model()
        w = stat_forward_selection(model, np.zeros(model.n))
        assert np.abs(w.w).max() == 0.0
        res = knockoff_threshold(w.w, 0.2, Offset.KNOCKOFF)
        assert res.selected.size == 0


class TestOmp:
    def test_orthonormal_matches_forward_selection(self):
        model = orthonormal_model(n=40, p=4, seed=5)
        y = model.X @ np.array([4.0, 1.0, -2.0, 0.5]) + 0.01 * np.random.default_rng(6).standard_normal(40)
        assert np.array_equal(stat_omp(model, y).w, stat_forward_selection(model, y).w)

    def test_single_column_response(self):
        model = seeded_model()
        y = 3.0 * model.Xtilde[:, 2]
        w = stat_omp(model, y).w
        assert w[2] == -2.0 * model.p  # knockoff entered first at step 1
        assert np.abs(np.delete(w, 2)).max() == 0.0

    def test_residual_orthogonal_to_active(self):
        model = seeded_model(n=60, p=8, seed=15)
        rng = np.random.default_rng(16)
        y = model.X @ (rng.standard_normal(8) * 2) + 0.5 * rng.standard_normal(60)
        a = np.hstack([model.X, model.Xtilde])
        # replicate five steps by hand, checking orthogonality after refits
        active = []
        coef = np.zeros(0)
        for _ in range(5):
            r = y - (a[:, active] @ coef if active else 0.0)
            corr = a.T @ r
            mag = np.abs(corr)
            mag[active] = -1.0
            active.append(int(np.argmax(mag)))
            g = a[:, active]
            coef = np.linalg.solve(g.T @ g, g.T @ y)
        r = y - a[:, active] @ coef
        assert np.abs(a[:, active].T @ r).max() < 1e-10


class TestAntisymmetry:
    @pytest.mark.parametrize("kind", list(StatKind))
    def test_swap_flips_single_coordinate(self, kind):
        model = seeded_model(n=48, p=6, seed=17)
        rng = np.random.default_rng(18)
        y = model.X @ np.array([3.0, 0.0, -2.0, 0.0, 1.0, 0.0]) + rng.standard_normal(48)
        w0 = compute_stat(model, y, kind).w
        for j in (1, 4):
            w1 = compute_stat(swap_pairs(model, j), y, kind).w
            assert w1[j] == pytest.approx(-w0[j], rel=1e-6, abs=1e-9)
            others = np.delete(np.arange(6), j)
            assert np.abs(w1[others] - w0[others]).max() < 1e-6


class TestGoodStatisticPositivity:
    @pytest.mark.parametrize(
        "statfn",
        [
            lambda m, y: stat_least_squares(m, y, Combiner.DIFFERENCE).w,
            lambda m, y: half_lasso(m, y, 0.3).stat(StatKind.HALF_LASSO, Combiner.DIFFERENCE).w,
            lambda m, y: neg_half_lasso(m, y, 0.3).stat(StatKind.NEG_HALF_LASSO, Combiner.DIFFERENCE).w,
        ],
        ids=["least-squares", "half-lasso", "neg-half-lasso"],
    )
    def test_doubling_reaches_and_keeps_positive(self, statfn):
        model = seeded_model(n=30, p=5, seed=19)
        eps = np.random.default_rng(20).standard_normal(30)  # fixed noise
        base = np.array([0.0, 1.0, -0.5, 0.0, 0.8])
        j = 0
        amp = 0.5
        for _ in range(40):
            beta = base.copy()
            beta[j] = amp
            if statfn(model, model.X @ beta + eps)[j] >= 0:
                break
            amp *= 2.0
        else:
            pytest.fail("statistic never became positive")
        for _ in range(10):
            amp *= 2.0
            beta = base.copy()
            beta[j] = amp
            assert statfn(model, model.X @ beta + eps)[j] >= 0


class TestDispatch:
    def test_default_combiners(self):
        model = seeded_model()
        y = np.random.default_rng(30).standard_normal(model.n)
        assert compute_stat(model, y, StatKind.LEAST_SQUARES).combiner == Combiner.DIFFERENCE
        assert compute_stat(model, y, StatKind.OMP).combiner == Combiner.SIGNED_MAX
        assert compute_stat(model, y, StatKind.HALF_LASSO).combiner == Combiner.SIGNED_MAX

    def test_half_lasso_without_complement_rejected(self):
        x = unit_design(12, 6, 23)
        model = build_knockoff(x, s_modified_sdp(gram(x), 0.5, 0.75))
        with pytest.raises(NoComplementError):
            compute_stat(model, np.ones(12), StatKind.HALF_LASSO)


def test_soft_threshold_basics():
    x = np.array([3.0, -3.0, 0.5])
    assert np.allclose(soft_threshold(x, 1.0), [2.0, -2.0, 0.0])
    assert np.allclose(soft_threshold(x, np.array([1.0, 2.0, 0.1])), [2.0, -1.0, 0.4])
