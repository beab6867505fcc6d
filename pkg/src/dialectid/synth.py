"""Synthetic desk-scale corpus: separable-by-construction audio and tokens.

Each synthetic "dialect" owns a disjoint frequency band; an utterance is a
stream of short tone bursts ("syllables") drawn from that band over a low
noise floor, 3-12 s long. The burst/gap rhythm keeps the features strongly
nonstationary, so the class signal survives per-utterance mean/variance
normalization. Parallel token streams use a per-dialect vocabulary mixed
with a shared vocabulary at a configurable overlap rate, so linguistic
separability is tunable (overlap 0 means disjoint vocabularies). Same
seed, same bytes.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import Waveform, write_wav
from .manifest import DEV, TEST, TRAIN, Row, save_manifest

BAND_LOW_HZ = 300.0
BAND_HIGH_HZ = 7200.0


@dataclass
class SynthConfig:
    num_dialects: int = 3
    utts_per_dialect: int = 50
    seed: int = 0
    overlap: float = 0.5
    min_duration_s: float = 3.0
    max_duration_s: float = 12.0
    vocab_size: int = 40
    shared_vocab_size: int = 40
    min_tokens: int = 15
    max_tokens: int = 40
    sample_rate: int = 16000

    def __post_init__(self):
        if self.num_dialects < 2:
            raise ValueError("need at least 2 dialects")
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError("vocabulary overlap must lie in [0, 1]")


def dialect_band(k, num_dialects):
    """Disjoint band for dialect k: the middle 60% of its frequency slot."""
    slot = (BAND_HIGH_HZ - BAND_LOW_HZ) / num_dialects
    low = BAND_LOW_HZ + k * slot
    return low + 0.2 * slot, low + 0.8 * slot


def _render_utterance(rng, band, duration_s, cfg):
    n = int(round(duration_s * cfg.sample_rate))
    sig = 0.02 * rng.standard_normal(n)
    cursor = 0
    while True:
        cursor += int(rng.uniform(0.03, 0.12) * cfg.sample_rate)  # gap
        end = cursor + int(rng.uniform(0.12, 0.30) * cfg.sample_rate)
        if cursor >= n:
            break
        end = min(end, n)
        dur = end - cursor
        t = np.arange(dur) / cfg.sample_rate
        burst = np.zeros(dur)
        for _ in range(int(rng.integers(1, 3))):
            freq = rng.uniform(band[0], band[1])
            burst += rng.uniform(0.5, 1.0) * np.sin(
                2 * np.pi * freq * t + rng.uniform(0, 2 * np.pi))
        ramp = min(80, dur // 4)  # raised-cosine edges, no clicks
        if ramp > 0:
            edge = 0.5 - 0.5 * np.cos(np.pi * np.arange(ramp) / ramp)
            burst[:ramp] *= edge
            burst[dur - ramp:] *= edge[::-1]
        sig[cursor:end] += burst
        cursor = end
    peak = np.max(np.abs(sig))
    return Waveform(sig * (0.8 / peak), cfg.sample_rate)


def _draw_tokens(rng, dialect_idx, cfg):
    count = int(rng.integers(cfg.min_tokens, cfg.max_tokens + 1))
    tokens = []
    for _ in range(count):
        if rng.random() < cfg.overlap:
            tokens.append(f"shw{rng.integers(0, cfg.shared_vocab_size):02d}")
        else:
            tokens.append(f"d{dialect_idx}w{rng.integers(0, cfg.vocab_size):02d}")
    return tokens


def _split_for(index, total):
    n_train = round(0.6 * total)
    n_dev = round(0.2 * total)
    if index < n_train:
        return TRAIN
    if index < n_train + n_dev:
        return DEV
    return TEST


def generate_corpus(out_dir, cfg=None):
    """Write WAVs, a shared token file, and manifest.csv; returns the manifest path."""
    cfg = cfg or SynthConfig()
    out_dir = Path(out_dir)
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(cfg.seed)

    rows = []
    token_lines = []
    for k in range(cfg.num_dialects):
        label = f"DIAL{k}"
        band = dialect_band(k, cfg.num_dialects)
        for i in range(cfg.utts_per_dialect):
            utt_id = f"{label.lower()}_{i:04d}"
            duration = rng.uniform(cfg.min_duration_s, cfg.max_duration_s)
            wav = _render_utterance(rng, band, duration, cfg)
            write_wav(audio_dir / f"{utt_id}.wav", wav)
            tokens = _draw_tokens(rng, k, cfg)
            token_lines.append(f"{utt_id}\t{' '.join(tokens)}\n")
            rows.append(Row(utt_id, f"audio/{utt_id}.wav", "tokens.txt", label,
                            _split_for(i, cfg.utts_per_dialect)))

    with open(out_dir / "tokens.txt", "w", encoding="utf-8") as f:
        f.writelines(token_lines)
    manifest_path = out_dir / "manifest.csv"
    save_manifest(rows, manifest_path)
    return manifest_path


def load_token_file(path):
    """Parse "utt_id<TAB>tok tok ..." lines into {utt_id: [tokens]}."""
    out = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            utt_id, _, rest = line.partition("\t")
            if not rest:
                raise ValueError(f"{path}:{lineno}: expected 'utt_id<TAB>tokens'")
            if utt_id in out:
                raise ValueError(f"{path}:{lineno}: duplicate utterance {utt_id!r}")
            out[utt_id] = rest.split(" ")
    return out
