"""Language-embedding network trained on (representative, utterance) pairs.

One ReLU dense stack (1500-600-200) is applied to both sides of a pair, so
the two branches share a single parameter set. Training regresses the
cosine similarity of the two embeddings onto a +1/-1 same-dialect label
with a squared-error loss; the 200-d last-hidden activations are the
language embedding used for cosine scoring.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels, nn
from .vsm import SparseVector

HIDDEN_UNITS = (1500, 600, 200)


class SiameseNet:
    """Shared dense stack; forward works on dense (B, D) or SparseVector lists."""

    def __init__(self, input_dim, rng=None, hidden_units=HIDDEN_UNITS):
        if len(hidden_units) < 1:
            raise ValueError("need at least one hidden layer")
        rng = rng or np.random.default_rng(0)
        self.input_dim = input_dim
        self.hidden_units = tuple(hidden_units)
        self.layers = []
        prev = input_dim
        for i, u in enumerate(hidden_units):
            self.layers.append(nn.Dense(prev, u, rng, f"fc{i + 1}"))
            prev = u

    @property
    def embedding_dim(self):
        return self.hidden_units[-1]

    def forward(self, x):
        """Embed a batch; returns (embeddings (B, emb_dim), caches)."""
        caches = []
        h = x
        for layer in self.layers:
            h, c = layer.forward(h)
            caches.append(c)
            h, m = nn.relu(h)
            caches.append(m)
        return h, caches

    def backward(self, gy, caches):
        caches = list(caches)
        g = gy
        for layer in reversed(self.layers):
            g = nn.relu_backward(g, caches.pop())
            g = layer.backward(g, caches.pop())
        return g

    def params(self):
        for layer in self.layers:
            yield from layer.params()

    def zero_grad(self):
        for layer in self.layers:
            layer.zero_grad()

    def topology(self):
        return {"model": "siamese", "input_dim": self.input_dim,
                "hidden_units": list(self.hidden_units)}


def build_model(input_dim, rng=None, hidden_units=HIDDEN_UNITS):
    return SiameseNet(input_dim, rng, hidden_units)


def snapshot(model):
    params = {name: p.astype("<f4") for name, p, _ in model.params()}
    return {"topology": model.topology(), "params": params}


def restore(snap):
    top = snap["topology"]
    model = SiameseNet(top["input_dim"], np.random.default_rng(0),
                       tuple(top["hidden_units"]))
    for name, p, _ in model.params():
        stored = snap["params"][name]
        if stored.shape != p.shape:
            raise ValueError(f"checkpoint shape mismatch for {name}: "
                             f"{stored.shape} vs {p.shape}")
        p[:] = stored.astype(np.float64)
    return model


def pair_similarity(e1, e2):
    """Row-wise cosine of two embedding batches; zero embeddings score 0."""
    n1 = np.linalg.norm(e1, axis=1)
    n2 = np.linalg.norm(e2, axis=1)
    valid = (n1 > 0) & (n2 > 0)
    dots = np.sum(e1 * e2, axis=1)
    return np.where(valid, dots / np.where(valid, n1 * n2, 1.0), 0.0), valid


def pair_loss(similarity, y):
    """Squared distance between the +/-1 label and the cosine similarity."""
    return (y - similarity) ** 2


def forward_pair(model, rep_batch, utt_batch):
    """Embeds both sides; returns (e_rep, e_utt, similarity, caches)."""
    e_rep, c_rep = model.forward(rep_batch)
    e_utt, c_utt = model.forward(utt_batch)
    sim, valid = pair_similarity(e_rep, e_utt)
    return e_rep, e_utt, sim, (c_rep, c_utt, e_rep, e_utt, valid)


def backward_pair(model, dsim, cache):
    """Accumulates the pair-loss gradient through both shared branches.

    dsim is dLoss/dsimilarity per pair. Where either embedding is zero the
    cosine is defined as 0 with zero gradient.
    """
    c_rep, c_utt, e1, e2, valid = cache
    n1 = np.linalg.norm(e1, axis=1)
    n2 = np.linalg.norm(e2, axis=1)
    safe1 = np.where(valid, n1, 1.0)
    safe2 = np.where(valid, n2, 1.0)
    dots = np.sum(e1 * e2, axis=1)
    cos = np.where(valid, dots / (safe1 * safe2), 0.0)
    scale = np.where(valid, dsim, 0.0)[:, None]
    g1 = scale * (e2 / (safe1 * safe2)[:, None] - (cos / safe1 ** 2)[:, None] * e1)
    g2 = scale * (e1 / (safe1 * safe2)[:, None] - (cos / safe2 ** 2)[:, None] * e2)
    model.backward(g1, c_rep)
    model.backward(g2, c_utt)


class PairSampler:
    """Balanced true/false pair stream with boosted dev-set exposure.

    Each batch is half true pairs (utterance with its own dialect's
    representative) and half false pairs (a uniformly drawn wrong
    dialect's representative). Utterances from the dev source are sampled
    `dev_weight` times as often as training ones.
    """

    def __init__(self, items, representatives, dialect_order, rng, dev_weight=5.0):
        # items: (utt_id, SparseVector, dialect, source) with source train|dev
        if len(dialect_order) < 2:
            raise ValueError("pair sampling needs at least 2 dialects")
        present = {d for _, _, d, _ in items}
        empty = [d for d in dialect_order if d not in present]
        if empty:
            raise ValueError(f"dialects with zero utterances: {empty}")
        self.items = list(items)
        self.dialect_order = list(dialect_order)
        self.dialect_pos = {d: i for i, d in enumerate(dialect_order)}
        self.rep_matrix = np.stack([representatives[d] for d in dialect_order])
        self.rng = rng
        weights = np.array([dev_weight if src == "dev" else 1.0
                            for _, _, _, src in self.items])
        self.probs = weights / weights.sum()

    def sample(self, batch_size=32):
        """Returns (rep_dense (B, D), utterance SparseVector list, labels (B,))."""
        n_true = batch_size // 2
        picks = self.rng.choice(len(self.items), size=batch_size, p=self.probs)
        rep_rows, utts, labels = [], [], []
        for slot, idx in enumerate(picks):
            _, vec, dialect, _ = self.items[idx]
            own = self.dialect_pos[dialect]
            if slot < n_true:
                rep_rows.append(own)
                labels.append(1.0)
            else:
                wrong = [j for j in range(len(self.dialect_order)) if j != own]
                rep_rows.append(wrong[self.rng.integers(0, len(wrong))])
                labels.append(-1.0)
            utts.append(vec)
        return self.rep_matrix[rep_rows], utts, np.array(labels)


@dataclass
class SiameseTrainConfig:
    input_dim: int
    batch_size: int = 32
    num_batches: int = 600
    learning_rate: float = 0.05
    dev_weight: float = 5.0
    hidden_units: tuple = HIDDEN_UNITS
    seed: int = 0


def train(items, representatives, dialect_order, cfg):
    """SGD over balanced pair batches; returns (model, log)."""
    rng = np.random.default_rng(cfg.seed)
    model = SiameseNet(cfg.input_dim, rng, cfg.hidden_units)
    sampler = PairSampler(items, representatives, dialect_order, rng, cfg.dev_weight)
    sgd = nn.Sgd(nn.SgdConfig(learning_rate=cfg.learning_rate))
    losses = []
    for _ in range(cfg.num_batches):
        rep_batch, utt_batch, labels = sampler.sample(cfg.batch_size)
        model.zero_grad()
        _, _, sim, cache = forward_pair(model, rep_batch, utt_batch)
        loss = float(np.mean(pair_loss(sim, labels)))
        if not np.isfinite(loss):
            raise RuntimeError(f"non-finite pair loss at batch {sgd.batches_seen}")
        backward_pair(model, -2.0 * (labels - sim), cache)
        sgd.step(model.params(), scale=1.0 / cfg.batch_size)
        losses.append(loss)
    log = {"seed": cfg.seed, "kernel_backend": kernels.backend,
           "batch_losses": losses, "batches_seen": sgd.batches_seen}
    return model, log


def embed(model, vec):
    """200-d embedding of one count vector (sparse or dense)."""
    if isinstance(vec, SparseVector):
        out, _ = model.forward([vec])
    else:
        out, _ = model.forward(np.asarray(vec, dtype=np.float64)[None, :])
    return out[0]


def score_embeddings(model, vec, representatives, dialect_order):
    """Cosine between the utterance embedding and each dialect's."""
    e_utt = embed(model, vec)
    scores = np.empty(len(dialect_order))
    for j, d in enumerate(dialect_order):
        e_rep = embed(model, representatives[d])
        sim, _ = pair_similarity(e_rep[None, :], e_utt[None, :])
        scores[j] = sim[0]
    return scores
