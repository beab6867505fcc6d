import mpmath
import numpy as np
import pytest

from dialectid import nn
from dialectid.e2e import E2ENet


def numeric_grad(f, arr, h=1e-4):
    """Central finite differences of scalar f() wrt every entry of arr."""
    g = np.zeros_like(arr)
    it = np.nditer(arr, flags=["multi_index"])
    for _ in it:
        ix = it.multi_index
        old = arr[ix]
        arr[ix] = old + h
        fp = f()
        arr[ix] = old - h
        fm = f()
        arr[ix] = old
        g[ix] = (fp - fm) / (2 * h)
    return g


def max_rel_error(analytic, numeric):
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
    return np.max(np.abs(analytic - numeric) / denom)


class TestConvForward:
    def test_hand_example(self):
        layer = nn.Conv1d(1, 1, 2, 1)
        layer.w[:] = 1.0
        layer.b[:] = 0.0
        y, _ = layer.forward(np.array([[1.0, 2.0, 3.0, 4.0]]))
        np.testing.assert_array_equal(y, [[3.0, 5.0, 7.0]])

    def test_identity_kernel(self):
        layer = nn.Conv1d(1, 1, 1, 1)
        layer.w[:] = 1.0
        layer.b[:] = 0.0
        x = np.arange(8.0)[None, :]
        y, _ = layer.forward(x)
        np.testing.assert_array_equal(y, x)

    def test_boundary_length(self):
        layer = nn.Conv1d(2, 3, 6, 1, np.random.default_rng(0))
        y, _ = layer.forward(np.random.default_rng(1).normal(size=(2, 6)))
        assert y.shape == (3, 1)


class TestGlobalAveragePool:
    def test_single_column(self):
        x = np.array([[3.0], [7.0]])
        pooled, t = nn.global_average_pool(x)
        assert t == 1
        np.testing.assert_array_equal(pooled, [3.0, 7.0])

    def test_channel_mean(self):
        pooled, _ = nn.global_average_pool(np.array([[2.0, 4.0, 6.0]]))
        assert pooled[0] == 4.0

    def test_repetition_invariance(self):
        x = np.random.default_rng(0).normal(size=(5, 7))
        a, _ = nn.global_average_pool(x)
        b, _ = nn.global_average_pool(np.concatenate([x, x], axis=1))
        np.testing.assert_allclose(a, b, rtol=1e-12)


class TestSoftmaxCrossEntropy:
    def test_uniform_logits(self):
        loss, p, _ = nn.softmax_cross_entropy(np.zeros(5), 2)
        np.testing.assert_allclose(p, 0.2)
        assert abs(loss - np.log(5)) < 1e-12

    def test_extreme_logits_stable(self):
        loss, p, _ = nn.softmax_cross_entropy(np.array([1000.0, 0.0]), 0)
        assert np.all(np.isfinite(p))
        np.testing.assert_allclose(p, [1.0, 0.0], atol=1e-300)
        assert loss == 0.0

    def test_matches_extended_precision_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            logits = rng.normal(scale=5.0, size=6)
            p = nn.softmax(logits)
            with mpmath.workdps(60):
                es = [mpmath.exp(mpmath.mpf(float(v))) for v in logits]
                s = sum(es)
                oracle = np.array([float(e / s) for e in es])
            assert np.max(np.abs(p - oracle)) < 1e-12

    def test_simplex_property_fuzz(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            logits = rng.normal(scale=rng.uniform(0.1, 100), size=rng.integers(2, 9))
            p = nn.softmax(logits)
            assert abs(p.sum() - 1.0) < 1e-9
            assert np.all(p >= 0)

    def test_label_out_of_range(self):
        with pytest.raises(ValueError, match="label"):
            nn.softmax_cross_entropy(np.zeros(3), 3)


def tiny_net(rng):
    """2-conv / dense stack small enough for finite differences."""
    conv1 = nn.Conv1d(2, 3, 3, 1, rng, "c1")
    conv2 = nn.Conv1d(3, 2, 3, 2, rng, "c2")
    dense = nn.Dense(2, 3, rng, "d1")
    return conv1, conv2, dense


def tiny_forward(layers, x, label):
    conv1, conv2, dense = layers
    h, c1 = conv1.forward(x)
    h, m1 = nn.relu(h)
    h, c2 = conv2.forward(h)
    h, m2 = nn.relu(h)
    pooled, t = nn.global_average_pool(h)
    logits, c3 = dense.forward(pooled[None, :])
    loss, _, dlogits = nn.softmax_cross_entropy(logits[0], label)
    return loss, (c1, m1, c2, m2, t, c3, dlogits)


def tiny_backward(layers, cache):
    conv1, conv2, dense = layers
    c1, m1, c2, m2, t, c3, dlogits = cache
    g = dense.backward(dlogits[None, :], c3)
    g = nn.global_average_pool_backward(g[0], t)
    g = nn.relu_backward(g, m2)
    g = conv2.backward(g, c2)
    g = nn.relu_backward(g, m1)
    conv1.backward(g, c1)


class TestGradients:
    def test_small_stack_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        layers = tiny_net(rng)
        x = rng.normal(size=(2, 12))
        label = 1
        for layer in layers:
            layer.zero_grad()
        loss, cache = tiny_forward(layers, x, label)
        assert loss > 0
        tiny_backward(layers, cache)
        for name, p, g in [pr for layer in layers for pr in layer.params()]:
            num = numeric_grad(lambda: tiny_forward(layers, x, label)[0], p)
            assert max_rel_error(g, num) < 1e-4, name

    def test_full_e2e_stack_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        model = E2ENet(4, 3, rng, scale_divisor=250)
        x = rng.normal(size=(4, 15))
        model.zero_grad()
        logits, caches = model.forward(x)
        loss, _, dlogits = nn.softmax_cross_entropy(logits, 2)
        model.backward(dlogits, caches)

        def loss_fn():
            lg, _ = model.forward(x)
            return nn.softmax_cross_entropy(lg, 2)[0]

        for name, p, g in model.params():
            num = numeric_grad(loss_fn, p)
            assert max_rel_error(g, num) < 1e-4, name

    def test_zero_final_layer_blocks_upstream_gradient(self):
        rng = np.random.default_rng(6)
        layers = tiny_net(rng)
        conv1, conv2, dense = layers
        dense.w[:] = 0.0
        dense.b[:] = 0.0
        for layer in layers:
            layer.zero_grad()
        x = rng.normal(size=(2, 12))
        _, cache = tiny_forward(layers, x, 0)
        tiny_backward(layers, cache)
        assert np.all(conv1.gw == 0.0) and np.all(conv1.gb == 0.0)
        assert np.all(conv2.gw == 0.0) and np.all(conv2.gb == 0.0)
        # the softmax bias gradient itself is p - onehot, not zero
        np.testing.assert_allclose(dense.gb, [1 / 3 - 1, 1 / 3, 1 / 3], rtol=1e-12)

    def test_duplicated_example_doubles_accumulated_gradient(self):
        rng = np.random.default_rng(7)
        layers = tiny_net(rng)
        x = rng.normal(size=(2, 12))
        for layer in layers:
            layer.zero_grad()
        _, cache = tiny_forward(layers, x, 1)
        tiny_backward(layers, cache)
        once = [g.copy() for _, _, g in [pr for l in layers for pr in l.params()]]
        for layer in layers:
            layer.zero_grad()
        for _ in range(2):
            _, cache = tiny_forward(layers, x, 1)
            tiny_backward(layers, cache)
        twice = [g for _, _, g in [pr for l in layers for pr in l.params()]]
        for a, b in zip(once, twice):
            np.testing.assert_allclose(b, 2.0 * a, rtol=1e-12)


class TestSgd:
    def test_learning_rate_schedule(self):
        sgd = nn.Sgd(nn.SgdConfig())
        assert sgd.effective_lr == 0.001
        sgd.batches_seen = 50000
        assert abs(sgd.effective_lr - 0.00098) < 1e-12
        sgd.batches_seen = 100000
        assert abs(sgd.effective_lr - 0.001 * 0.98 ** 2) < 1e-15

    def test_nan_gradient_names_parameter(self):
        sgd = nn.Sgd()
        p = np.zeros(3)
        g = np.array([0.0, np.nan, 0.0])
        with pytest.raises(FloatingPointError, match="pbad"):
            sgd.step([("pbad", p, g)])

    def test_single_example_loss_decreases_for_small_lr(self):
        rng = np.random.default_rng(8)
        layers = tiny_net(rng)
        x = rng.normal(size=(2, 12))
        label = 0
        for layer in layers:
            layer.zero_grad()
        loss0, cache = tiny_forward(layers, x, label)
        tiny_backward(layers, cache)
        params = [pr for l in layers for pr in l.params()]
        backup = [p.copy() for _, p, _ in params]
        for lr in (1e-1, 1e-2, 1e-3, 1e-4):
            for (_, p, g), b in zip(params, backup):
                p[:] = b - lr * g
            loss1, _ = tiny_forward(layers, x, label)
            for (_, p, _), b in zip(params, backup):
                p[:] = b
            if loss1 < loss0:
                return
        pytest.fail("no step size decreased the loss")
