import numpy as np
import pytest

from mcrard.exceptions import NonPositiveBandwidth, AllFeaturesPruned
from mcrard.io import Dataset
from mcrard.metrics import correlation, selection_recall
from mcrard.models import McrArdConfig, LsrArdConfig, fit_mcr_ard, fit_lsr_ard, \
                          w_step, negative_hessian, laplace_moments, psi_weights, \
                          correntropy_density, correntropy_log_density, \
                          correntropy_objective, correntropy_gradient, predict, \
                          weighted_gram, mcr_ard_iteration, a_step
from mcrard.experiments import SyntheticSpec, generate


def grid_maximize(X, t, h, half_width=3.0):
    """
    Maximizes J over a +-3 lattice: coarse pass at step 0.05, then a 1e-3
    lattice around the coarse optimum.
    """
    def best_on(g0, g1):
        W0, W1 = np.meshgrid(g0, g1, indexing="ij")
        W = np.stack([W0.ravel(), W1.ravel()], axis=1)
        eps = t[None, :] - W @ X.T
        J = np.exp(-eps ** 2 / (2 * h)).sum(axis=1) - 0.5 * (W ** 2).sum(axis=1)
        return W[np.argmax(J)]

    coarse = np.arange(-half_width, half_width + 1e-9, 0.05)
    w0 = best_on(coarse, coarse)
    fine = np.arange(-0.1, 0.1 + 1e-9, 1e-3)
    return best_on(w0[0] + fine, w0[1] + fine)


class TestCorrentropyDensity:

    def test_origin(self):
        assert correntropy_log_density(0.0, 3.0) == 1.0
        assert correntropy_density(0.0, 3.0) == pytest.approx(np.e)

    def test_tail_tends_to_one(self):
        assert correntropy_density(1e3, 1.0) == pytest.approx(1.0)

    def test_two_h(self):
        h = 2.5
        assert correntropy_log_density(np.sqrt(2 * h), h) == pytest.approx(np.exp(-1))

    def test_psi(self):
        np.testing.assert_array_equal(psi_weights(np.zeros(4), 1.0), 1.0)
        np.testing.assert_allclose(psi_weights([1.0, -2.0], 1e12), 1.0, atol=1e-11)

    def test_nonpositive_bandwidth(self):
        with pytest.raises(NonPositiveBandwidth):
            psi_weights([1.0], 0.0)
        with pytest.raises(NonPositiveBandwidth):
            McrArdConfig(bandwidth=-1.0)

    @pytest.mark.parametrize("kwargs", [{"prune_threshold": 0.0},
                                        {"max_outer_iters": 0},
                                        {"max_fp_iters": 0},
                                        {"fp_tol": 0.0},
                                        {"hessian_mode": "newton"}])
    def test_invalid_config(self, kwargs):
        with pytest.raises(ValueError):
            McrArdConfig(**kwargs)


class TestWStep:

    def test_ls_limit_is_ridge(self, rng):
        X = rng.standard_normal((40, 3))
        t = rng.standard_normal(40)
        h = 1e9
        w = w_step(Dataset(X, t), np.ones(3), h, np.zeros(3))
        ridge = np.linalg.solve(X.T @ X + np.eye(3), X.T @ t)
        np.testing.assert_allclose(w, ridge, atol=1e-6)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_grid_search(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((20, 2))
        t = X @ rng.uniform(-1.0, 1.0, 2) + 0.1 * rng.standard_normal(20)
        cfg = McrArdConfig(bandwidth=1.0, max_fp_iters=1000, fp_tol=1e-12)
        w = w_step(Dataset(X, t), np.ones(2), 1.0, np.zeros(2), cfg)
        np.testing.assert_allclose(w, grid_maximize(X, t, 1.0), atol=2e-3)

    @pytest.mark.parametrize("seed", range(20))
    def test_gradient_vanishes(self, seed):
        rng = np.random.default_rng(100 + seed)
        X = rng.standard_normal((25, 4))
        t = X @ rng.standard_normal(4) + rng.laplace(0.0, 0.5, 25)
        a = rng.uniform(0.1, 2.0, 4)
        h = rng.uniform(0.5, 5.0)
        cfg = McrArdConfig(bandwidth=h, max_fp_iters=2000, fp_tol=1e-13)
        w = w_step(Dataset(X, t), a, h, np.zeros(4), cfg)
        grad = correntropy_gradient(X, t, w, a, h)
        assert np.max(np.abs(grad)) <= 1e-4 * (1 + np.max(np.abs(w)))

    def test_fixed_point_passes_never_decrease_objective(self, rng):
        X = rng.standard_normal((30, 4))
        t = X @ rng.standard_normal(4) + rng.laplace(0.0, 1.0, 30)
        a, h = np.full(4, 0.5), 0.8
        values = []
        for passes in range(1, 8):
            cfg = McrArdConfig(bandwidth=h, max_fp_iters=passes, fp_tol=1e-300)
            w = w_step(Dataset(X, t), a, h, np.zeros(4), cfg)
            values.append(correntropy_objective(X, t, w, a, h))
        assert np.all(np.diff(values) >= -1e-10)


class TestHessian:

    def test_gradient_matches_finite_differences(self, rng):
        X = rng.standard_normal((15, 3))
        t = rng.standard_normal(15)
        a, h, w = np.array([0.5, 1.0, 2.0]), 1.5, rng.standard_normal(3)
        step = 1e-6
        fd = np.array([(correntropy_objective(X, t, w + step * e, a, h)
                        - correntropy_objective(X, t, w - step * e, a, h)) / (2 * step)
                       for e in np.eye(3)])
        np.testing.assert_allclose(correntropy_gradient(X, t, w, a, h), fd,
                                   rtol=1e-6, atol=1e-7)

    @pytest.mark.parametrize("seed", range(20))
    def test_exact_matches_finite_differences(self, seed):
        rng = np.random.default_rng(200 + seed)
        X = rng.standard_normal((12, 3))
        t = rng.standard_normal(12) * 2.0
        a, h, w = rng.uniform(0.1, 1.0, 3), rng.uniform(0.5, 3.0), rng.standard_normal(3)
        step = 1e-5
        fd = np.array([-(correntropy_gradient(X, t, w + step * e, a, h)
                         - correntropy_gradient(X, t, w - step * e, a, h)) / (2 * step)
                       for e in np.eye(3)])
        H = negative_hessian(Dataset(X, t), w, a, h, safeguard=False)
        assert np.linalg.norm(H - fd) <= 1e-3 * np.linalg.norm(fd)

    def test_zero_errors(self, rng):
        X = rng.standard_normal((10, 3))
        w = rng.standard_normal(3)
        a, h = np.array([1.0, 2.0, 3.0]), 2.0
        H = negative_hessian(Dataset(X, X @ w), w, a, h)
        np.testing.assert_allclose(H, X.T @ X + np.diag(a), rtol=1e-12)

    def test_data_term_vanishes_at_eps2_equal_h(self):
        h = 4.0
        X = np.array([[1.0, 2.0]])
        H = negative_hessian(Dataset(X, [np.sqrt(h)]), np.zeros(2),
                             np.array([1.0, 3.0]), h)
        np.testing.assert_allclose(H, np.diag([1.0, 3.0]), atol=1e-15)

    def test_safeguard_drops_large_errors(self):
        X = np.array([[1.0]])
        raw = negative_hessian(Dataset(X, [2.0]), np.zeros(1), np.array([0.01]),
                               1.0, safeguard=False)
        assert raw[0, 0] < 0
        H = negative_hessian(Dataset(X, [2.0]), np.zeros(1), np.array([0.01]), 1.0)
        np.testing.assert_allclose(H, [[0.01]])

    def test_gauss_style(self, rng):
        X = rng.standard_normal((10, 2))
        t = rng.standard_normal(10)
        w, a, h = np.array([0.3, -0.2]), np.array([1.0, 2.0]), 0.7
        psi = psi_weights(t - X @ w, h)
        H = negative_hessian(Dataset(X, t), w, a, h, mode="gauss_style_psd")
        np.testing.assert_allclose(H, (X.T * psi) @ X + np.diag(a), rtol=1e-12)

    def test_laplace_moments(self):
        np.testing.assert_allclose(laplace_moments(np.diag([4.0, 10.0])), [0.25, 0.1])
        np.testing.assert_allclose(laplace_moments(np.eye(3)), np.ones(3))

    def test_weighted_gram(self, rng):
        X = rng.standard_normal((12, 3))
        weights, a = rng.uniform(0.0, 1.0, 12), np.array([0.5, 1.0, 2.0])
        np.testing.assert_allclose(weighted_gram(X, weights, a),
                                   X.T @ np.diag(weights) @ X + np.diag(a),
                                   rtol=1e-12)

    def test_iteration_updates_relevance(self, sparse_data):
        data, _ = sparse_data
        cfg = McrArdConfig(bandwidth=2.0)
        w0, a0 = np.zeros(data.X.shape[1]), np.ones(data.X.shape[1])
        w, a, s2, n_fp = mcr_ard_iteration(data.X, data.t, w0, a0, 2.0, cfg)
        H = negative_hessian(data, w, a0, 2.0)
        np.testing.assert_allclose(s2, np.diag(np.linalg.inv(H)), rtol=1e-8)
        np.testing.assert_allclose(a, a_step(w, s2, a0))
        assert 1 <= n_fp <= cfg.max_fp_iters


class TestFitMcrArd:

    def test_noise_free_recovery(self):
        w_true = np.zeros(20)
        w_true[:5] = [1.5, -1.0, 2.0, -0.8, 1.2]
        train, test, _, relevant = generate(SyntheticSpec(100, 100, 20, 5, seed=7),
                                            w_true)
        model = fit_mcr_ard(train, McrArdConfig(bandwidth=10.0))
        assert model.algorithm == "mcr-ard"
        assert model.bandwidth == 10.0
        assert selection_recall(model.active_indices, relevant) == 1.0
        assert correlation(predict(model, test.X), test.t) > 0.99

    def test_ls_limit_trajectory_matches_lsr(self, rng):
        X = rng.standard_normal((100, 20))
        t = X[:, :5] @ np.array([1.0, -1.0, 0.5, 2.0, -1.5]) + \
            0.3 * rng.standard_normal(100)
        data, h = Dataset(X, t), 1e9
        mcr = fit_mcr_ard(data, McrArdConfig(bandwidth=h, prune_threshold=np.inf,
                                             max_outer_iters=3))
        lsr = fit_lsr_ard(data, LsrArdConfig(prune_threshold=np.inf, max_iters=3,
                                             noise_variance=1.0))
        assert mcr.n_iters == lsr.n_iters
        np.testing.assert_array_equal(mcr.active_mask, lsr.active_mask)
        np.testing.assert_allclose(mcr.weights, lsr.weights, rtol=1e-4,
                                   atol=1e-4 * np.max(np.abs(lsr.weights)))

    def test_ls_limit_fit_matches_unit_variance_lsr(self, rng):
        X = rng.standard_normal((100, 20))
        t = X[:, :5] @ np.array([1.0, -1.0, 0.5, 2.0, -1.5]) + \
            0.3 * rng.standard_normal(100)
        data = Dataset(X, t)
        mcr = fit_mcr_ard(data, McrArdConfig(bandwidth=1e9))
        lsr = fit_lsr_ard(data, LsrArdConfig(noise_variance=1.0))
        np.testing.assert_array_equal(mcr.active_mask, lsr.active_mask)
        assert np.max(np.abs(mcr.weights - lsr.weights)) < 1e-4

    def test_small_residual_limit_matches_lsr(self):
        w_true = np.zeros(20)
        w_true[:5] = [1.0, -1.0, 0.5, 2.0, -1.5]
        train, _, _, _ = generate(SyntheticSpec(100, 1, 20, 5, seed=11), w_true)
        mcr = fit_mcr_ard(train, McrArdConfig(bandwidth=1.0))
        lsr = fit_lsr_ard(train, LsrArdConfig(noise_variance=1.0))
        np.testing.assert_array_equal(mcr.active_mask, lsr.active_mask)
        assert np.max(np.abs(mcr.weights - lsr.weights)) < 1e-3

    def test_pruned_weights_are_zero(self):
        train, _, _, _ = generate(SyntheticSpec(80, 1, 15, 3, seed=5))
        model = fit_mcr_ard(train, McrArdConfig(bandwidth=5.0))
        assert np.all(model.weights[~model.active_mask] == 0.0)
        assert model.active_mask.sum() <= 15

    def test_protected_column_is_kept(self, rng):
        X = np.column_stack([rng.standard_normal(40), np.ones(40)])
        model = fit_mcr_ard(Dataset(X, np.zeros(40)),
                            McrArdConfig(bandwidth=1.0, prune_threshold=10.0),
                            protected=[1])
        assert model.active_mask[1]

    def test_everything_pruned_raises(self, rng):
        data = Dataset(rng.standard_normal((40, 2)), np.zeros(40))
        with pytest.raises(AllFeaturesPruned):
            fit_mcr_ard(data, McrArdConfig(bandwidth=1.0, prune_threshold=10.0))

    def test_objective_trace_length(self, sparse_data):
        data, _ = sparse_data
        model = fit_mcr_ard(data, McrArdConfig(bandwidth=2.0, max_outer_iters=4))
        assert len(model.objective_trace) == model.n_iters <= 4

    def test_deterministic(self, sparse_data):
        data, _ = sparse_data
        first = fit_mcr_ard(data, McrArdConfig(bandwidth=3.0))
        second = fit_mcr_ard(data, McrArdConfig(bandwidth=3.0))
        np.testing.assert_array_equal(first.weights, second.weights)

    @pytest.mark.slow
    def test_gauss_style_mode_recovers(self):
        w_true = np.zeros(30)
        w_true[:4] = [1.0, -2.0, 1.5, 0.7]
        train, test, _, _ = generate(SyntheticSpec(150, 150, 30, 4, seed=2), w_true)
        model = fit_mcr_ard(train, McrArdConfig(bandwidth=10.0,
                                                hessian_mode="gauss_style_psd"))
        assert correlation(predict(model, test.X), test.t) > 0.99
