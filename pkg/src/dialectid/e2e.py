"""End-to-end acoustic dialect classifier.

Four 1-d conv layers (widths 5-7-1-1, strides 1-2-1-1, filter counts
500-500-500-3000) over per-utterance-normalized feature frames, global
average pooling to a fixed 3000-d utterance vector, two ReLU dense layers
(1500, 600) and a softmax over dialects. The softmax output is the
per-dialect score. A scale divisor shrinks every channel/unit count for
desk-scale runs; checkpoints record it.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import kernels, nn
from .augment import random_segment

CONV_WIDTHS = (5, 7, 1, 1)
CONV_STRIDES = (1, 2, 1, 1)
CONV_FILTERS = (500, 500, 500, 3000)
DENSE_UNITS = (1500, 600)


class E2ENet:
    """Conv stack + global average pooling + dense softmax head."""

    def __init__(self, in_dim, num_dialects, rng=None, scale_divisor=1):
        if num_dialects < 2:
            raise ValueError("need at least 2 dialects")
        if scale_divisor < 1:
            raise ValueError("scale divisor must be >= 1")
        rng = rng or np.random.default_rng(0)
        self.in_dim = in_dim
        self.num_dialects = num_dialects
        self.scale_divisor = scale_divisor

        filters = [max(1, c // scale_divisor) for c in CONV_FILTERS]
        units = [max(1, u // scale_divisor) for u in DENSE_UNITS]
        self.convs = []
        prev = in_dim
        for i, (width, stride, count) in enumerate(zip(CONV_WIDTHS, CONV_STRIDES, filters)):
            self.convs.append(nn.Conv1d(prev, count, width, stride, rng, f"conv{i + 1}"))
            prev = count
        self.denses = []
        for i, u in enumerate(units):
            self.denses.append(nn.Dense(prev, u, rng, f"dense{i + 1}"))
            prev = u
        self.denses.append(nn.Dense(prev, num_dialects, rng, f"dense{len(units) + 1}"))

    @property
    def min_input_frames(self):
        t = 1
        for conv in reversed(self.convs):
            t = (t - 1) * conv.stride + conv.kernel_width
        return t

    def forward(self, x):
        """x: (in_dim, T) -> (logits, caches)."""
        caches = []
        h = x
        for conv in self.convs:
            h, c = conv.forward(h)
            caches.append(c)
            h, m = nn.relu(h)
            caches.append(m)
        pooled, t = nn.global_average_pool(h)
        caches.append(t)
        h = pooled[None, :]
        for dense in self.denses[:-1]:
            h, c = dense.forward(h)
            caches.append(c)
            h, m = nn.relu(h)
            caches.append(m)
        logits, c = self.denses[-1].forward(h)
        caches.append(c)
        return logits[0], caches

    def backward(self, dlogits, caches):
        caches = list(caches)
        g = self.denses[-1].backward(dlogits[None, :], caches.pop())
        for dense in reversed(self.denses[:-1]):
            g = nn.relu_backward(g, caches.pop())
            g = dense.backward(g, caches.pop())
        g = nn.global_average_pool_backward(g[0], caches.pop())
        for conv in reversed(self.convs):
            g = nn.relu_backward(g, caches.pop())
            g = conv.backward(g, caches.pop())
        return g

    def layers(self):
        return self.convs + self.denses

    def params(self):
        for layer in self.layers():
            yield from layer.params()

    def zero_grad(self):
        for layer in self.layers():
            layer.zero_grad()

    def topology(self):
        return {"model": "e2e", "in_dim": self.in_dim,
                "num_dialects": self.num_dialects,
                "scale_divisor": self.scale_divisor}


def build_model(feature_dim, num_dialects, rng=None, scale_divisor=1):
    return E2ENet(feature_dim, num_dialects, rng, scale_divisor)


def snapshot(model):
    """Parameters rounded to checkpoint (float32) precision."""
    params = {name: p.astype("<f4") for name, p, _ in model.params()}
    return {"topology": model.topology(), "params": params}


def restore(snap):
    top = snap["topology"]
    model = E2ENet(top["in_dim"], top["num_dialects"],
                   np.random.default_rng(0), top["scale_divisor"])
    for name, p, _ in model.params():
        stored = snap["params"][name]
        if stored.shape != p.shape:
            raise ValueError(f"checkpoint shape mismatch for {name}: "
                             f"{stored.shape} vs {p.shape}")
        p[:] = stored.astype(np.float64)
    return model


def score(model, feats):
    """Softmax probabilities over dialects for a full-length utterance."""
    x = np.ascontiguousarray(feats.frames.T)
    if x.shape[0] != model.in_dim:
        raise ValueError(f"feature dim {x.shape[0]} does not match model "
                         f"input dim {model.in_dim}")
    if x.shape[1] < model.min_input_frames:
        raise ValueError(f"utterance too short: {x.shape[1]} frames, "
                         f"model needs >= {model.min_input_frames}")
    logits, _ = model.forward(x)
    return nn.softmax(logits)


def log_score(model, feats):
    """Log of the softmax scores (exported alongside probabilities)."""
    return np.log(np.maximum(score(model, feats), 1e-300))


@dataclass
class E2ETrainConfig:
    feature_dim: int
    num_dialects: int
    batch_size: int = 32
    max_epochs: int = 30
    scale_divisor: int = 1
    random_segment: bool = True
    learning_rate: float = 0.001
    lr_decay: float = 0.98
    lr_decay_interval: int = 50000
    convergence_threshold: float = 1e-5
    convergence_window: int = 100
    seed: int = 0


@dataclass
class TrainResult:
    model_maximum: E2ENet
    model_converged: E2ENet
    log: dict


class TrainingDiverged(RuntimeError):
    """Raised on a non-finite loss; carries the last good snapshot."""

    def __init__(self, message, last_good, log):
        super().__init__(message)
        self.last_good = last_good
        self.log = log


def _validation_accuracy(model, items):
    if not items:
        return 0.0
    hits = sum(int(np.argmax(score(model, feats)) == label)
               for _, feats, label in items)
    return hits / len(items)


def train(train_items, val_items, cfg):
    """SGD training with per-occurrence random segmentation.

    train_items / val_items: lists of (utterance_id, FeatureMatrix, label).
    Tracks the best-validation-accuracy snapshot ("maximum") and the first
    snapshot where the trailing mean loss over `convergence_window` batches
    drops below `convergence_threshold` ("converged"; final state flagged
    as unconverged if that never happens).
    """
    labels_present = {label for _, _, label in train_items}
    missing = set(range(cfg.num_dialects)) - labels_present
    if missing:
        raise ValueError(f"no training utterances for dialect indices {sorted(missing)}")
    for utt, feats, _ in train_items + val_items:
        if feats.num_frames < 11:
            raise ValueError(f"{utt}: {feats.num_frames} frames, need >= 11")

    rng = np.random.default_rng(cfg.seed)
    model = E2ENet(cfg.feature_dim, cfg.num_dialects, rng, cfg.scale_divisor)
    sgd = nn.Sgd(nn.SgdConfig(cfg.learning_rate, cfg.lr_decay, cfg.lr_decay_interval))
    window = deque(maxlen=cfg.convergence_window)
    log = {"seed": cfg.seed, "kernel_backend": kernels.backend, "epochs": [],
           "maximum": None, "converged": None}
    best = None
    converged_snap = None

    for epoch in range(cfg.max_epochs):
        order = rng.permutation(len(train_items))
        epoch_losses = []
        for lo in range(0, len(order), cfg.batch_size):
            batch = order[lo:lo + cfg.batch_size]
            model.zero_grad()
            batch_loss = 0.0
            for idx in batch:
                _, feats, label = train_items[idx]
                if cfg.random_segment:
                    feats = random_segment(feats, rng)
                logits, caches = model.forward(np.ascontiguousarray(feats.frames.T))
                loss, _, dlogits = nn.softmax_cross_entropy(logits, label)
                batch_loss += loss
                model.backward(dlogits, caches)
            batch_loss /= len(batch)
            if not np.isfinite(batch_loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch} batch {sgd.batches_seen}",
                    snapshot(model), log)
            sgd.step(model.params(), scale=1.0 / len(batch))
            epoch_losses.append(batch_loss)
            window.append(batch_loss)
            if (converged_snap is None and len(window) == cfg.convergence_window
                    and float(np.mean(window)) < cfg.convergence_threshold):
                converged_snap = snapshot(model)
                acc = _validation_accuracy(restore(converged_snap), val_items)
                log["converged"] = {"reached": True, "epoch": epoch,
                                    "batch": sgd.batches_seen,
                                    "mean_window_loss": float(np.mean(window)),
                                    "val_accuracy": acc}
                if best is None or acc > best[0]:
                    best = (acc, converged_snap, {"epoch": epoch, "mid_epoch": True})

        val_acc = _validation_accuracy(model, val_items)
        log["epochs"].append({"epoch": epoch,
                              "mean_loss": float(np.mean(epoch_losses)),
                              "val_accuracy": val_acc})
        if best is None or val_acc > best[0]:
            best = (val_acc, snapshot(model), {"epoch": epoch, "mid_epoch": False})

    log["maximum"] = {"val_accuracy": best[0], **best[2]}
    if converged_snap is None:
        converged_snap = snapshot(model)
        log["converged"] = {"reached": False, "epoch": cfg.max_epochs - 1,
                            "batch": sgd.batches_seen,
                            "val_accuracy": log["epochs"][-1]["val_accuracy"]}
    log["batches_seen"] = sgd.batches_seen
    return TrainResult(restore(best[1]), restore(converged_snap), log)
