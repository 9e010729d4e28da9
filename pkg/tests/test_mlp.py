import numpy as np
import pytest

from hyperbgc.mlp import (INPUT_EPSILON, MlpParams, flatten_params, gradient_step,
                          init_mlp, input_stats, mlp_forward, mlp_loss_grad,
                          predict_bgc, unflatten_params)


@pytest.fixture()
def small_batch(rng):
    x = rng.uniform(1e-4, 0.05, size=(12, 301))
    y = rng.normal(0.0, 0.6, size=(12, 3))
    return x, y


class TestForward:
    def test_zero_weights_return_biases(self):
        params = init_mlp(seed=0)
        zeroed = unflatten_params(params, np.zeros(flatten_params(params).size))
        bias = np.array([0.4, -0.2, 0.1])
        zeroed = MlpParams(w1=zeroed.w1, b1=zeroed.b1, w2=zeroed.w2, b2=zeroed.b2,
                           w3=zeroed.w3, b3=bias, x_mean=zeroed.x_mean,
                           x_std=zeroed.x_std)
        out = mlp_forward(zeroed, np.full(301, 0.01))
        assert np.allclose(out, bias)

    def test_deterministic(self, small_batch):
        x, _ = small_batch
        params = init_mlp(seed=1)
        assert np.array_equal(mlp_forward(params, x), mlp_forward(params, x))

    def test_finite_for_library_range(self, dataset2k):
        mean, std = input_stats(dataset2k.rrs)
        params = init_mlp(seed=2, x_mean=mean, x_std=std)
        out = mlp_forward(params, dataset2k.rrs[:100])
        assert np.all(np.isfinite(out))

    def test_predict_exponentiates(self, small_batch):
        x, _ = small_batch
        params = init_mlp(seed=3)
        assert predict_bgc(params, x) == pytest.approx(10.0 ** mlp_forward(params, x))

    def test_rejects_wrong_band_count(self):
        params = init_mlp(seed=0)
        with pytest.raises(ValueError):
            mlp_forward(params, np.ones(300))

    def test_rejects_nonfinite_input(self):
        params = init_mlp(seed=0)
        x = np.ones(301)
        x[7] = np.nan
        with pytest.raises(ValueError):
            mlp_forward(params, x)


class TestLossGrad:
    def test_perfect_prediction_zero_loss_and_grad(self, small_batch):
        x, _ = small_batch
        params = init_mlp(seed=4)
        y = mlp_forward(params, x)
        loss, grads = mlp_loss_grad(params, x, y)
        assert loss == 0.0
        for g in grads.values():
            assert np.all(g == 0.0)

    def test_batch_order_invariant_loss(self, small_batch):
        x, y = small_batch
        params = init_mlp(seed=5)
        loss1, _ = mlp_loss_grad(params, x, y)
        perm = np.random.default_rng(0).permutation(len(x))
        loss2, _ = mlp_loss_grad(params, x[perm], y[perm])
        assert loss1 == pytest.approx(loss2, rel=1e-12)

    def test_empty_batch_rejected(self):
        params = init_mlp(seed=0)
        with pytest.raises(ValueError):
            mlp_loss_grad(params, np.empty((0, 301)), np.empty((0, 3)))

    def test_gradients_match_finite_differences(self, small_batch):
        # oracle: central finite differences on 20 random coordinates
        x, y = small_batch
        mean, std = input_stats(x)
        params = init_mlp(seed=6, x_mean=mean, x_std=std)
        _, grads = mlp_loss_grad(params, x, y)
        flat = flatten_params(params)
        analytic = np.concatenate([grads[n].ravel()
                                   for n in ("w1", "b1", "w2", "b2", "w3", "b3")])
        coords = np.random.default_rng(99).choice(flat.size, size=20, replace=False)
        for idx in coords:
            h = 6e-6 * max(1.0, abs(flat[idx]))
            up, down = flat.copy(), flat.copy()
            up[idx] += h
            down[idx] -= h
            loss_up, _ = mlp_loss_grad(unflatten_params(params, up), x, y)
            loss_dn, _ = mlp_loss_grad(unflatten_params(params, down), x, y)
            fd = (loss_up - loss_dn) / (2.0 * h)
            denom = max(abs(fd), abs(analytic[idx]), 1e-8)
            assert abs(fd - analytic[idx]) / denom < 1e-4


class TestParameterOps:
    def test_flatten_roundtrip(self):
        params = init_mlp(seed=7)
        flat = flatten_params(params)
        rebuilt = unflatten_params(params, flat)
        for name in ("w1", "b1", "w2", "b2", "w3", "b3"):
            assert np.array_equal(getattr(params, name), getattr(rebuilt, name))

    def test_gradient_step_returns_new_params(self, small_batch):
        x, y = small_batch
        params = init_mlp(seed=8)
        before = flatten_params(params).copy()
        _, grads = mlp_loss_grad(params, x, y)
        stepped = gradient_step(params, grads, 0.01)
        assert np.array_equal(flatten_params(params), before)
        assert not np.array_equal(flatten_params(stepped), before)

    def test_input_stats_floor(self):
        mean, std = input_stats(np.full((5, 301), 0.02))
        assert np.all(std >= 1e-6)
        assert mean == pytest.approx(np.log10(0.02 + INPUT_EPSILON))

    def test_init_glorot_bounds(self):
        params = init_mlp(seed=9)
        s1 = np.sqrt(6.0 / (301 + 64))
        assert np.abs(params.w1).max() <= s1
        assert np.all(params.b1 == 0.0)
