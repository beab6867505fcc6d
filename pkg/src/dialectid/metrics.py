"""Score normalization and detection metrics: accuracy, EER, minimum C_avg.

EER and C_avg treat every (utterance, dialect) cell of a score table as a
detection trial: a target trial when the dialect equals the utterance's
truth label, a non-target trial otherwise. Decisions are "accept if
score >= threshold", and thresholds sweep the distinct scores present.
"""

from dataclasses import dataclass

import numpy as np

from .scores import ScoreTable


@dataclass
class CostModel:
    """Detection costs and target prior (equal unit costs, 0.5 prior)."""

    p_target: float = 0.5
    c_miss: float = 1.0
    c_fa: float = 1.0

    def __post_init__(self):
        if not 0 < self.p_target < 1:
            raise ValueError("target prior must lie strictly between 0 and 1")


def znorm(table, cohort):
    """Per-dialect affine normalization using cohort column statistics."""
    if table.dialects != cohort.dialects:
        raise ValueError("table and cohort dialect orderings differ")
    if cohort.num_utts < 2:
        raise ValueError("z-norm cohort needs at least 2 utterances")
    mu = cohort.scores.mean(axis=0)
    sd = cohort.scores.std(axis=0)
    for j, d in enumerate(table.dialects):
        if sd[j] == 0.0:
            raise ValueError(f"z-norm cohort has zero variance for dialect {d!r}")
    return ScoreTable(table.utt_ids, table.dialects, (table.scores - mu) / sd,
                      table.truth, table.system)


def accuracy(table):
    """Fraction of utterances whose max-scoring dialect equals truth.

    Ties resolve to the lowest dialect index (np.argmax behaviour).
    """
    truth = table.truth_indices()
    return float(np.mean(np.argmax(table.scores, axis=1) == truth))


def _pooled_trials(table):
    truth = table.truth_indices()
    target_mask = np.zeros(table.scores.shape, dtype=bool)
    target_mask[np.arange(table.num_utts), truth] = True
    tgt = table.scores[target_mask]
    non = table.scores[~target_mask]
    if len(tgt) == 0 or len(non) == 0:
        raise ValueError("EER needs at least one target and one non-target trial")
    return np.sort(tgt), np.sort(non)


def eer(table):
    """Pooled equal error rate over all (utterance, dialect) trials.

    Sweeps every distinct score as a threshold and reports
    (P_miss + P_fa) / 2 at the threshold minimizing |P_miss - P_fa| (first
    such threshold in ascending order).
    """
    tgt, non = _pooled_trials(table)
    thresholds = np.unique(np.concatenate([tgt, non]))
    p_miss = np.searchsorted(tgt, thresholds, side="left") / len(tgt)
    p_fa = (len(non) - np.searchsorted(non, thresholds, side="left")) / len(non)
    best = int(np.argmin(np.abs(p_miss - p_fa)))
    return (p_miss[best] + p_fa[best]) / 2.0


def min_cavg(table, cost=None):
    """Minimum average detection cost over a shared hard-decision threshold.

    For each class L at threshold t:
      P_miss(L, t)      fraction of true-L trials with score[L] < t
      P_fa(L, L', t)    fraction of true-L' trials with score[L] >= t
    and the cost averages P_miss against the target prior and the off-class
    false alarms against the spread non-target prior. The same threshold is
    applied to every class; the minimum over all distinct scores is returned.
    """
    cost = cost or CostModel()
    truth = table.truth_indices()
    n_classes = len(table.dialects)
    if n_classes < 2:
        raise ValueError("C_avg needs at least 2 classes")
    counts = np.bincount(truth, minlength=n_classes)
    if np.any(counts == 0):
        empty = [table.dialects[j] for j in np.flatnonzero(counts == 0)]
        raise ValueError(f"classes with zero trials: {empty}")

    thresholds = np.unique(table.scores)
    beta = (1.0 - cost.p_target) / (n_classes - 1)
    by_truth = [np.flatnonzero(truth == j) for j in range(n_classes)]
    total = np.zeros(len(thresholds))
    for left in range(n_classes):
        col = table.scores[:, left]
        own = np.sort(col[by_truth[left]])
        p_miss = np.searchsorted(own, thresholds, side="left") / len(own)
        fa_sum = np.zeros(len(thresholds))
        for other in range(n_classes):
            if other == left:
                continue
            foreign = np.sort(col[by_truth[other]])
            p_fa = (len(foreign) - np.searchsorted(foreign, thresholds, side="left")) \
                / len(foreign)
            fa_sum = fa_sum + p_fa
        total = total + (cost.p_target * cost.c_miss * p_miss + beta * cost.c_fa * fa_sum)
    return float(np.min(total / n_classes))
