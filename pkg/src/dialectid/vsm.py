"""N-gram count vectors over pre-tokenized utterances.

An utterance becomes a fixed-length sparse vector of n-gram occurrence
counts over a dictionary built from training data. Word features use
unigrams, character and phoneme features use trigrams (the order is a
config knob). Per-dialect representative vectors are plain means of the
dialect's utterance vectors, and cosine against them is the non-embedding
scoring baseline.
"""

from dataclasses import dataclass, field

import numpy as np

WORD = "word"
CHAR = "char"
PHONE = "phone"
LEVELS = (WORD, CHAR, PHONE)
DEFAULT_NGRAM_ORDER = {WORD: 1, CHAR: 3, PHONE: 3}


@dataclass
class TokenSequence:
    utterance_id: str
    level: str
    tokens: list

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValueError(f"unknown token level {self.level!r}")
        if any(not t for t in self.tokens):
            raise ValueError(f"{self.utterance_id}: empty token")


@dataclass
class SparseVector:
    """Counts at strictly increasing indices of a D-dimensional vector."""

    dim: int
    indices: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.counts = np.asarray(self.counts, dtype=np.float64)
        if len(self.indices) != len(self.counts):
            raise ValueError("indices and counts length mismatch")
        if len(self.indices) and (np.any(np.diff(self.indices) <= 0)
                                  or self.indices[0] < 0
                                  or self.indices[-1] >= self.dim):
            raise ValueError("indices must be strictly increasing within [0, dim)")
        if np.any(self.counts < 1):
            raise ValueError("counts must be >= 1")

    def to_dense(self):
        dense = np.zeros(self.dim)
        dense[self.indices] = self.counts
        return dense

    @property
    def total(self):
        return float(self.counts.sum())


def ngrams(tokens, level, n):
    """Enumerate the n-gram keys of a token sequence.

    Word and phoneme features slide a stride-1 window of n tokens (joined
    with spaces; a lone token for n=1). Character features slide the window
    over each token's characters independently, so windows never cross word
    boundaries.
    """
    if level == CHAR:
        out = []
        for tok in tokens:
            out.extend(tok[i:i + n] for i in range(len(tok) - n + 1))
        return out
    if n == 1:
        return list(tokens)
    return [" ".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


@dataclass
class NGramDictionary:
    level: str
    n: int
    entries: dict = field(default_factory=dict)  # n-gram -> dense index

    @property
    def size(self):
        return len(self.entries)


def build_dictionary(sequences, level, n=None):
    """Collect every training n-gram, indexed in lexicographic order."""
    sequences = list(sequences)
    if not sequences:
        raise ValueError("cannot build a dictionary from an empty corpus")
    n = n or DEFAULT_NGRAM_ORDER[level]
    grams = set()
    for seq in sequences:
        if seq.level != level:
            raise ValueError(f"{seq.utterance_id}: level {seq.level!r}, expected {level!r}")
        grams.update(ngrams(seq.tokens, level, n))
    return NGramDictionary(level, n, {g: i for i, g in enumerate(sorted(grams))})


def save_dictionary(dictionary, path):
    """One n-gram per line, in index order (the line number is the index)."""
    ordered = sorted(dictionary.entries, key=dictionary.entries.get)
    with open(path, "w", encoding="utf-8") as f:
        for gram in ordered:
            f.write(gram + "\n")


def load_dictionary(path, level, n=None):
    n = n or DEFAULT_NGRAM_ORDER[level]
    with open(path, encoding="utf-8") as f:
        entries = {line.rstrip("\n"): i for i, line in enumerate(f)}
    if not entries:
        raise ValueError(f"{path}: empty n-gram dictionary")
    return NGramDictionary(level, n, entries)


def vectorize(seq, dictionary):
    """Count the sequence's n-grams against a fixed dictionary.

    Out-of-vocabulary n-grams are dropped (there is no OOV bucket). Returns
    (SparseVector, number_of_dropped_ngrams).
    """
    if seq.level != dictionary.level:
        raise ValueError(f"{seq.utterance_id}: level {seq.level!r} does not match "
                         f"dictionary level {dictionary.level!r}")
    counts = {}
    dropped = 0
    for gram in ngrams(seq.tokens, dictionary.level, dictionary.n):
        idx = dictionary.entries.get(gram)
        if idx is None:
            dropped += 1
        else:
            counts[idx] = counts.get(idx, 0) + 1
    idx_sorted = np.array(sorted(counts), dtype=np.int64)
    vals = np.array([counts[i] for i in idx_sorted], dtype=np.float64)
    return SparseVector(dictionary.size, idx_sorted, vals), dropped


def representative_vectors(vectors_by_dialect):
    """Mean utterance vector per dialect: {dialect: [SparseVector]} -> dict.

    Every dialect needs at least one utterance; means are dense arrays.
    """
    reps = {}
    for dialect, vecs in vectors_by_dialect.items():
        if not vecs:
            raise ValueError(f"dialect {dialect!r} has no utterances")
        acc = np.zeros(vecs[0].dim)
        for v in vecs:
            acc[v.indices] += v.counts
        reps[dialect] = acc / len(vecs)
    return reps


def cosine(a, b):
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def cosine_score_baseline(vec, representatives, dialect_order):
    """Cosine of an utterance vector against each dialect representative."""
    dense = vec.to_dense() if isinstance(vec, SparseVector) else np.asarray(vec)
    return np.array([cosine(dense, representatives[d]) for d in dialect_order])
