"""Corpus manifests: utterance id, audio/token paths, dialect, split.

Stored as UTF-8 CSV with the header
utterance_id,path,tokens,dialect,split,provenance. Paths are kept relative
to the manifest's directory. The provenance column records augmentation
("orig", "speed=0.9", "vol=2.0").
"""

import csv
from dataclasses import dataclass, replace
from pathlib import Path

TRAIN = "TRAIN"
DEV = "DEV"
TEST = "TEST"
SPLITS = (TRAIN, DEV, TEST)

COLUMNS = ("utterance_id", "path", "tokens", "dialect", "split", "provenance")


class ManifestError(ValueError):
    pass


@dataclass
class Row:
    utterance_id: str
    path: str
    tokens: str
    dialect: str
    split: str
    provenance: str = "orig"

    def replaced(self, **kwargs):
        return replace(self, **kwargs)

    @property
    def base_id(self):
        """Source utterance id, with any augmentation suffix stripped."""
        return self.utterance_id.split("#", 1)[0]


def save_manifest(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(COLUMNS)
        for r in rows:
            writer.writerow([r.utterance_id, r.path, r.tokens, r.dialect,
                             r.split, r.provenance])


def load_manifest(path, labels=None, check_paths=True):
    """Load and validate a manifest.

    Rejects duplicate ids, missing referenced files, labels outside
    `labels` (when given; otherwise the label set found in TRAIN rows),
    unknown split names, and empty TRAIN/DEV/TEST splits.
    """
    path = Path(path)
    rows = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != COLUMNS:
            raise ManifestError(f"{path}: bad manifest header {header!r}")
        for parts in reader:
            if len(parts) != len(COLUMNS):
                raise ManifestError(f"{path}: malformed manifest row {parts!r}")
            rows.append(Row(*parts))

    seen = set()
    for r in rows:
        if r.utterance_id in seen:
            raise ManifestError(f"duplicate utterance id {r.utterance_id!r}")
        seen.add(r.utterance_id)
        if r.split not in SPLITS:
            raise ManifestError(f"{r.utterance_id}: unknown split {r.split!r}")

    if labels is None:
        labels = sorted({r.dialect for r in rows if r.split == TRAIN})
    for r in rows:
        if r.dialect not in labels:
            raise ManifestError(f"{r.utterance_id}: unknown dialect label "
                                f"{r.dialect!r} (expected one of {sorted(labels)})")

    for split in SPLITS:
        if not any(r.split == split for r in rows):
            raise ManifestError(f"{path}: empty split {split}")

    if check_paths:
        base = path.parent
        for r in rows:
            for p in (r.path, r.tokens):
                if p and not (base / p).exists():
                    raise ManifestError(f"{r.utterance_id}: missing file {base / p}")
    return rows


def resolve(manifest_path, rel):
    return Path(manifest_path).parent / rel


def split_rows(rows, split):
    return [r for r in rows if r.split == split]


def dialect_order(rows, labels=None):
    """Stable dialect ordering shared by score tables and models."""
    return labels if labels else sorted({r.dialect for r in rows})
