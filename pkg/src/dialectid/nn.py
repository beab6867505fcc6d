"""Minimal trainable network kernel with exact analytic gradients.

Conv1d works on a single (channels, time) example since utterances vary in
length; Dense works on (batch, dim) matrices. Layers accumulate parameter
gradients across backward calls (zero_grad between mini-batches), so the
batch gradient is the accumulated sum scaled by 1/batch_size at step time.
All arithmetic is float64.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels


def he_uniform(rng, shape, fan_in):
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Conv1d:
    """1-d valid cross-correlation layer, weights (out, in, width)."""

    def __init__(self, in_channels, out_channels, kernel_width, stride=1,
                 rng=None, name="conv"):
        if stride < 1:
            raise ValueError("stride must be >= 1")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_width = kernel_width
        self.stride = stride
        self.name = name
        rng = rng or np.random.default_rng(0)
        self.w = he_uniform(rng, (out_channels, in_channels, kernel_width),
                            in_channels * kernel_width)
        self.b = np.zeros(out_channels)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)

    def forward(self, x):
        y = kernels.conv1d_forward(x, self.w, self.b, self.stride)
        return y, x

    def backward(self, gy, cache):
        gx, gw, gb = kernels.conv1d_backward(cache, self.w, self.stride, gy)
        self.gw += gw
        self.gb += gb
        return gx

    def zero_grad(self):
        self.gw[:] = 0.0
        self.gb[:] = 0.0

    def params(self):
        yield f"{self.name}.w", self.w, self.gw
        yield f"{self.name}.b", self.b, self.gb


class Dense:
    """Fully connected layer on (batch, in) inputs, weights (out, in).

    The forward pass also accepts a SparseVector batch (list of vsm
    SparseVector) so a huge-dimensional count-vector input only touches its
    non-zero columns.
    """

    def __init__(self, in_dim, out_dim, rng=None, name="dense"):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.name = name
        rng = rng or np.random.default_rng(0)
        self.w = he_uniform(rng, (out_dim, in_dim), in_dim)
        self.b = np.zeros(out_dim)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)

    def forward(self, x):
        if isinstance(x, list):  # batch of SparseVector
            y = np.tile(self.b, (len(x), 1))
            for r, vec in enumerate(x):
                if len(vec.indices):
                    y[r] += self.w[:, vec.indices] @ vec.counts
            return y, x
        y = x @ self.w.T + self.b
        return y, x

    def backward(self, gy, cache):
        self.gb += gy.sum(axis=0)
        if isinstance(cache, list):
            for r, vec in enumerate(cache):
                if len(vec.indices):
                    self.gw[:, vec.indices] += np.outer(gy[r], vec.counts)
            return None  # input gradient unused for sparse count vectors
        self.gw += gy.T @ cache
        return gy @ self.w

    def zero_grad(self):
        self.gw[:] = 0.0
        self.gb[:] = 0.0

    def params(self):
        yield f"{self.name}.w", self.w, self.gw
        yield f"{self.name}.b", self.b, self.gb


def relu(x):
    """Returns (activations, cache for relu_backward)."""
    mask = x > 0
    return np.where(mask, x, 0.0), mask


def relu_backward(gy, mask):
    return np.where(mask, gy, 0.0)


def global_average_pool(x):
    """Per-channel mean over time: (channels, t) -> (channels,)."""
    return x.mean(axis=1), x.shape[1]


def global_average_pool_backward(gy, t):
    """Spread the pooled gradient uniformly over the t time steps."""
    return np.repeat(gy[:, None] / t, t, axis=1)


def softmax(logits):
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits, label):
    """Stable softmax + negative log likelihood of the integer label.

    Returns (loss, probabilities, dloss/dlogits).
    """
    if not 0 <= label < logits.shape[-1]:
        raise ValueError(f"label {label} out of range for {logits.shape[-1]} classes")
    p = softmax(logits)
    loss = -np.log(max(p[label], 1e-300))
    dlogits = p.copy()
    dlogits[label] -= 1.0
    return loss, p, dlogits


@dataclass
class SgdConfig:
    learning_rate: float = 0.001
    decay_factor: float = 0.98
    decay_interval_batches: int = 50000

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not 0 < self.decay_factor <= 1:
            raise ValueError("decay factor must be in (0, 1]")


class Sgd:
    """Plain SGD with stepwise learning-rate decay every N mini-batches."""

    def __init__(self, cfg=None):
        self.cfg = cfg or SgdConfig()
        self.batches_seen = 0

    @property
    def effective_lr(self):
        steps = self.batches_seen // self.cfg.decay_interval_batches
        return self.cfg.learning_rate * self.cfg.decay_factor ** steps

    def step(self, named_params, scale=1.0):
        """Apply p -= lr_eff * scale * g for every (name, p, g) triple.

        `scale` is typically 1/batch_size so accumulated gradients become the
        batch mean. A non-finite gradient aborts, naming the parameter.
        """
        lr = self.effective_lr
        for name, p, g in named_params:
            if not np.all(np.isfinite(g)):
                raise FloatingPointError(f"non-finite gradient in parameter {name!r}")
            p -= lr * scale * g
        self.batches_seen += 1
