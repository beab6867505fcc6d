"""Score tables: utterances x dialects matrices with optional truth labels.

The on-disk form is TSV with header "utt_id <dialects...> [truth]"; floats
are written with repr so values round-trip bit-exactly.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class ScoreTable:
    utt_ids: list
    dialects: list
    scores: np.ndarray  # (num_utts, num_dialects)
    truth: Optional[list] = None  # dialect name per utterance
    system: str = ""

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.scores.shape != (len(self.utt_ids), len(self.dialects)):
            raise ValueError("score matrix shape does not match ids/dialects")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("score table contains non-finite scores")
        if self.truth is not None:
            if len(self.truth) != len(self.utt_ids):
                raise ValueError("truth labels do not match utterance count")
            unknown = set(self.truth) - set(self.dialects)
            if unknown:
                raise ValueError(f"truth labels not in dialect set: {sorted(unknown)}")

    @property
    def num_utts(self):
        return len(self.utt_ids)

    def truth_indices(self):
        if self.truth is None:
            raise ValueError(f"score table {self.system!r} has no truth labels")
        pos = {d: j for j, d in enumerate(self.dialects)}
        return np.array([pos[t] for t in self.truth], dtype=np.int64)

    def reordered(self, utt_ids):
        """Rows permuted to the given utterance id order."""
        pos = {u: i for i, u in enumerate(self.utt_ids)}
        missing = [u for u in utt_ids if u not in pos]
        if missing or len(utt_ids) != len(self.utt_ids):
            raise ValueError(f"utterance sets differ (missing e.g. {missing[:3]})")
        order = [pos[u] for u in utt_ids]
        truth = [self.truth[i] for i in order] if self.truth is not None else None
        return ScoreTable(list(utt_ids), self.dialects, self.scores[order],
                          truth, self.system)


def save_table(table, path):
    cols = ["utt_id"] + list(table.dialects) + (["truth"] if table.truth is not None else [])
    with open(path, "w", encoding="utf-8") as f:
        f.write("\t".join(cols) + "\n")
        for i, utt in enumerate(table.utt_ids):
            row = [utt] + [repr(float(s)) for s in table.scores[i]]
            if table.truth is not None:
                row.append(table.truth[i])
            f.write("\t".join(row) + "\n")


def load_table(path, system=None):
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n").split("\t")
        if not header or header[0] != "utt_id":
            raise ValueError(f"{path}: not a score table (header must start with utt_id)")
        has_truth = header[-1] == "truth"
        dialects = header[1:-1] if has_truth else header[1:]
        if not dialects:
            raise ValueError(f"{path}: score table has no dialect columns")
        utt_ids, rows, truth = [], [], [] if has_truth else None
        for line in f:
            parts = line.rstrip("\n").split("\t")
            if len(parts) != len(header):
                raise ValueError(f"{path}: malformed row {parts[0]!r}")
            utt_ids.append(parts[0])
            rows.append([float(v) for v in parts[1:len(dialects) + 1]])
            if has_truth:
                truth.append(parts[-1])
    tag = system if system is not None else str(path)
    return ScoreTable(utt_ids, dialects, np.array(rows, dtype=np.float64), truth, tag)
