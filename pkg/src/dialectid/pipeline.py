"""Shared orchestration: content hashing, run logs, feature cache, data prep.

Every derived artifact is reproducible from manifest + config + seed: the
feature cache is keyed by audio content hash, augmentation provenance, and
the feature configuration, and training always consumes the cached (stored
precision) matrices so in-memory and on-disk paths cannot diverge.
"""

import hashlib
import io
import json
from pathlib import Path

import numpy as np

from . import checkpoint
from .audio import read_wav, require_rate
from .augment import apply_provenance
from .features import FrameConfig, extract, normalize
from .manifest import DEV, TEST, TRAIN, resolve
from .synth import load_token_file
from .vsm import (DEFAULT_NGRAM_ORDER, TokenSequence, build_dictionary,
                  representative_vectors, vectorize)


def sha256_bytes(data):
    return hashlib.sha256(data).hexdigest()


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_runlog(path, command, config, inputs, outputs, extra=None):
    """Config snapshot + input content hashes; no timestamps, so identical
    runs produce identical logs."""
    payload = {
        "command": command,
        "config": config.to_dict() if config is not None else None,
        "inputs": {str(p): sha256_file(p) for p in sorted(set(map(str, inputs)))},
        "outputs": sorted(str(p) for p in outputs),
    }
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, sort_keys=True, indent=2)
        f.write("\n")


def frame_config_from(config):
    return FrameConfig(
        window_len_samples=config.get_int("features", "window_len_samples"),
        hop_samples=config.get_int("features", "hop_samples"),
        fft_size=config.get_int("features", "fft_size"),
        num_mel_filters=config.get_int("features", "num_mel_filters"),
        mel_low_hz=config.get_float("features", "mel_low_hz"),
        mel_high_hz=config.get_float("features", "mel_high_hz"),
    )


def feature_config_key(kind, frame_cfg):
    return (f"{kind}:w{frame_cfg.window_len_samples}:h{frame_cfg.hop_samples}"
            f":n{frame_cfg.fft_size}:m{frame_cfg.num_mel_filters}"
            f":{frame_cfg.mel_low_hz:g}-{frame_cfg.mel_high_hz:g}")


def ensure_features(manifest_path, row, cache_dir, kind, frame_cfg):
    """Return the row's normalized feature matrix, computing the cache entry
    on demand. Always reads back from the cache so every consumer sees the
    stored (float32) precision."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    wav_path = resolve(manifest_path, row.path)
    raw = wav_path.read_bytes()
    key = sha256_bytes(raw + row.provenance.encode()
                       + feature_config_key(kind, frame_cfg).encode())
    cached = cache_dir / f"{key[:40]}.feat"
    if not cached.exists():
        wav = require_rate(read_wav(io.BytesIO(raw)), wav_path)
        wav = apply_provenance(wav, row.provenance)
        feats = normalize(extract(kind, wav, frame_cfg))
        checkpoint.save_features(cached, feats, {"utterance_id": row.utterance_id})
    return checkpoint.load_features(cached)


def validation_ids(rows):
    """Last 10% (at least one) of each dialect's original dev rows, by id."""
    by_dialect = {}
    for r in rows:
        if r.split == DEV and r.provenance == "orig":
            by_dialect.setdefault(r.dialect, []).append(r)
    ids = set()
    for dialect in sorted(by_dialect):
        dev_rows = sorted(by_dialect[dialect], key=lambda r: r.utterance_id)
        n_val = max(1, round(0.1 * len(dev_rows)))
        ids.update(r.utterance_id for r in dev_rows[-n_val:])
    return ids


def assemble_training_sets(rows, loader, dialect_order):
    """(train_items, val_items) as (utt_id, features, label) triples.

    Training draws on TRAIN plus the non-validation part of DEV; augmented
    copies of validation utterances are excluded to avoid leakage.
    """
    val_ids = validation_ids(rows)
    pos = {d: i for i, d in enumerate(dialect_order)}
    train_items, val_items = [], []
    for r in sorted(rows, key=lambda r: r.utterance_id):
        if r.split == TEST or r.dialect not in pos:
            continue
        if r.utterance_id in val_ids:
            val_items.append((r.utterance_id, loader(r), pos[r.dialect]))
        elif r.base_id not in val_ids:
            train_items.append((r.utterance_id, loader(r), pos[r.dialect]))
    return train_items, val_items


def load_sequences(manifest_path, rows, level):
    """TokenSequence per manifest row, reading each token file once."""
    files = {}
    out = {}
    for r in rows:
        if not r.tokens:
            raise ValueError(f"{r.utterance_id}: manifest row has no token file")
        path = resolve(manifest_path, r.tokens)
        if path not in files:
            files[path] = load_token_file(path)
        table = files[path]
        base = r.base_id  # augmented audio copies share the source transcript
        if base not in table:
            raise ValueError(f"{r.utterance_id}: no tokens for {base!r} in {path}")
        out[r.utterance_id] = TokenSequence(r.utterance_id, level, table[base])
    return out


def build_vsm(manifest_path, rows, level, n=None):
    """Dictionary from TRAIN, vectors for all rows, representatives from
    TRAIN+DEV."""
    n = n or DEFAULT_NGRAM_ORDER[level]
    sequences = load_sequences(manifest_path, rows, level)
    train_seqs = [sequences[r.utterance_id] for r in rows if r.split == TRAIN]
    dictionary = build_dictionary(train_seqs, level, n)
    vectors = {uid: vectorize(seq, dictionary)[0] for uid, seq in sequences.items()}
    grouped = {}
    for r in rows:
        if r.split in (TRAIN, DEV):
            grouped.setdefault(r.dialect, []).append(vectors[r.utterance_id])
    return dictionary, vectors, representative_vectors(grouped)


def save_representatives(path, representatives, level, n):
    dialects = sorted(representatives)
    checkpoint.save_container(
        path, "representatives", {},
        {"dialects": dialects, "level": level, "n": n},
        {d: np.asarray(representatives[d], dtype=np.float64) for d in dialects})


def load_representatives(path):
    header, arrays = checkpoint.load_container(path, expect_kind="representatives")
    meta = header["metadata"]
    return {d: arrays[d] for d in meta["dialects"]}, meta
