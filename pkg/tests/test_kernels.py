"""Both conv kernel backends must agree with each other and with a direct
summation oracle."""

import numpy as np
import pytest

from dialectid import kernels
from dialectid.kernels import _convnp

BACKENDS = [_convnp]
try:
    from dialectid.kernels import _convext

    BACKENDS.append(_convext)
except ImportError:
    pass


def conv_oracle(x, w, b, stride):
    cout, cin, k = w.shape
    tp = (x.shape[1] - k) // stride + 1
    y = np.zeros((cout, tp))
    for o in range(cout):
        for j in range(tp):
            acc = b[o]
            for i in range(cin):
                for kk in range(k):
                    acc += w[o, i, kk] * x[i, j * stride + kk]
            y[o, j] = acc
    return y


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.split(".")[-1])
@pytest.mark.parametrize("cin,cout,k,t,stride", [
    (1, 1, 2, 4, 1),
    (3, 4, 5, 20, 1),
    (3, 4, 7, 21, 2),
    (2, 6, 1, 9, 3),
    (5, 2, 4, 4, 1),  # t == k boundary
])
def test_forward_matches_oracle(impl, cin, cout, k, t, stride):
    rng = np.random.default_rng(7)
    x = rng.normal(size=(cin, t))
    w = rng.normal(size=(cout, cin, k))
    b = rng.normal(size=cout)
    got = impl.conv1d_forward(np.ascontiguousarray(x), w, b, stride)
    np.testing.assert_allclose(got, conv_oracle(x, w, b, stride), rtol=1e-12)


def test_backends_agree_forward_and_backward():
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(3)
    for _ in range(20):
        cin, cout = rng.integers(1, 6, size=2)
        k = int(rng.integers(1, 8))
        stride = int(rng.integers(1, 4))
        t = int(rng.integers(k, k + 40))
        x = np.ascontiguousarray(rng.normal(size=(cin, t)))
        w = rng.normal(size=(cout, cin, k))
        b = rng.normal(size=cout)
        ya = _convnp.conv1d_forward(x, w, b, stride)
        yb = _convext.conv1d_forward(x, w, b, stride)
        np.testing.assert_allclose(ya, yb, rtol=1e-12, atol=1e-12)
        gy = np.ascontiguousarray(rng.normal(size=ya.shape))
        ga = _convnp.conv1d_backward(x, w, stride, gy)
        gb_ = _convext.conv1d_backward(x, w, stride, gy)
        for u, v in zip(ga, gb_):
            np.testing.assert_allclose(u, v, rtol=1e-12, atol=1e-12)


def test_output_length_formula_fuzz():
    rng = np.random.default_rng(11)
    for _ in range(50):
        k = int(rng.integers(1, 9))
        stride = int(rng.integers(1, 5))
        t = int(rng.integers(k, k + 100))
        x = rng.normal(size=(2, t))
        w = rng.normal(size=(3, 2, k))
        y = kernels.conv1d_forward(x, w, np.zeros(3), stride)
        assert y.shape == (3, (t - k) // stride + 1)


def test_too_short_input_rejected():
    x = np.zeros((1, 3))
    w = np.zeros((1, 1, 5))
    with pytest.raises(ValueError, match="too short"):
        kernels.conv1d_forward(x, w, np.zeros(1), 1)


def test_dispatcher_picked_a_backend():
    assert kernels.backend in ("ext", "numpy")
