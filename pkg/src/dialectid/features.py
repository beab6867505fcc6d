"""Acoustic front end: framing, spectrogram, log mel filterbank, MFCC.

All three feature kinds share the same framing (400-sample Hamming window,
160-sample hop at 16 kHz, i.e. 25 ms / 10 ms) and a per-utterance,
per-dimension mean/variance normalization.
"""

from dataclasses import dataclass

import numpy as np
import scipy.fft

MFCC = "mfcc"
FBANK = "fbank"
SPECTROGRAM = "spectrogram"
FEATURE_KINDS = (MFCC, FBANK, SPECTROGRAM)

# Energies are floored before the log so silence stays finite.
ENERGY_FLOOR = 1e-10

FRAME_HOP_S = 0.010
FRAME_LEN_S = 0.025


@dataclass
class FrameConfig:
    window_len_samples: int = 400
    hop_samples: int = 160
    fft_size: int = 512
    num_mel_filters: int = 40
    mel_low_hz: float = 20.0
    mel_high_hz: float = 7600.0
    # Spectrogram keeps this many of the lowest non-DC FFT bins.
    num_spectrogram_bins: int = 200

    def __post_init__(self):
        if self.window_len_samples > self.fft_size:
            raise ValueError("window length must not exceed the FFT size")
        if self.hop_samples > self.window_len_samples:
            raise ValueError("hop must not exceed the window length")
        if self.num_spectrogram_bins > self.fft_size // 2:
            raise ValueError("spectrogram bin count exceeds available non-DC bins")


@dataclass
class FeatureMatrix:
    """Frames-by-coefficients matrix tagged with its feature kind."""

    kind: str
    frames: np.ndarray  # (T, d) float64
    frame_hop_s: float = FRAME_HOP_S
    frame_len_s: float = FRAME_LEN_S

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 2 or self.frames.shape[0] < 1:
            raise ValueError("feature matrix must be 2-d with at least one frame")

    @property
    def num_frames(self):
        return self.frames.shape[0]

    @property
    def dim(self):
        return self.frames.shape[1]


def num_frames(num_samples, cfg):
    """Frame count for a signal of the given length: floor((n - win)/hop) + 1."""
    if num_samples < cfg.window_len_samples:
        return 0
    return (num_samples - cfg.window_len_samples) // cfg.hop_samples + 1


def frame_signal(waveform, cfg=None):
    """Slice a waveform into overlapping frames and apply the Hamming window.

    Returns an array of shape (T, window_len). Signals shorter than one
    window are rejected.
    """
    cfg = cfg or FrameConfig()
    x = waveform.samples
    n = num_frames(len(x), cfg)
    if n < 1:
        raise ValueError(
            f"signal too short to frame: {len(x)} samples, "
            f"minimum is {cfg.window_len_samples}"
        )
    idx = np.arange(cfg.window_len_samples)[None, :] + \
        cfg.hop_samples * np.arange(n)[:, None]
    return x[idx] * np.hamming(cfg.window_len_samples)[None, :]


def _power_spectrum(frames, cfg):
    # Frames are zero-padded to fft_size by rfft's n argument.
    spec = np.fft.rfft(frames, n=cfg.fft_size, axis=1)
    return np.abs(spec) ** 2


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(cfg, sample_rate_hz=16000):
    """Triangular mel filters as a (num_filters, fft_size//2 + 1) weight matrix."""
    n_bins = cfg.fft_size // 2 + 1
    mel_pts = np.linspace(hz_to_mel(cfg.mel_low_hz), hz_to_mel(cfg.mel_high_hz),
                          cfg.num_mel_filters + 2)
    hz_pts = mel_to_hz(mel_pts)
    bin_freqs = np.arange(n_bins) * sample_rate_hz / cfg.fft_size
    weights = np.zeros((cfg.num_mel_filters, n_bins))
    for m in range(cfg.num_mel_filters):
        left, center, right = hz_pts[m], hz_pts[m + 1], hz_pts[m + 2]
        rising = (bin_freqs - left) / (center - left)
        falling = (right - bin_freqs) / (right - center)
        weights[m] = np.maximum(0.0, np.minimum(rising, falling))
    return weights


def mel_filter_centers_hz(cfg):
    """Center frequency of each triangular filter."""
    mel_pts = np.linspace(hz_to_mel(cfg.mel_low_hz), hz_to_mel(cfg.mel_high_hz),
                          cfg.num_mel_filters + 2)
    return mel_to_hz(mel_pts)[1:-1]


def spectrogram(waveform, cfg=None):
    """Log power spectrum, lowest `num_spectrogram_bins` non-DC bins (T x 200).

    Output column j corresponds to FFT bin j + 1 (DC is dropped).
    """
    cfg = cfg or FrameConfig()
    frames = frame_signal(waveform, cfg)
    power = _power_spectrum(frames, cfg)[:, 1:cfg.num_spectrogram_bins + 1]
    return FeatureMatrix(SPECTROGRAM, np.log(np.maximum(power, ENERGY_FLOOR)))


def fbank(waveform, cfg=None):
    """Log mel filterbank energies (T x num_mel_filters)."""
    cfg = cfg or FrameConfig()
    frames = frame_signal(waveform, cfg)
    power = _power_spectrum(frames, cfg)
    energies = power @ mel_filterbank(cfg, waveform.sample_rate_hz).T
    return FeatureMatrix(FBANK, np.log(np.maximum(energies, ENERGY_FLOOR)))


def mfcc(waveform, cfg=None):
    """Orthonormal DCT-II of the log mel energies, all coefficients kept."""
    cfg = cfg or FrameConfig()
    logmel = fbank(waveform, cfg).frames
    return FeatureMatrix(MFCC, scipy.fft.dct(logmel, type=2, norm="ortho", axis=1))


def extract(kind, waveform, cfg=None):
    """Dispatch on feature kind."""
    if kind == MFCC:
        return mfcc(waveform, cfg)
    if kind == FBANK:
        return fbank(waveform, cfg)
    if kind == SPECTROGRAM:
        return spectrogram(waveform, cfg)
    raise ValueError(f"unknown feature kind {kind!r}")


def normalize(feats):
    """Zero-mean, unit-variance per coefficient dimension over the utterance.

    Dimensions with (numerically) zero variance map to all-zeros. Requires
    at least two frames.
    """
    x = feats.frames
    if x.shape[0] < 2:
        raise ValueError("normalization needs at least 2 frames")
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    centered = x - mu
    # Threshold is relative: a constant column can leave O(eps) residual std.
    dead = sd <= 1e-9 * (1.0 + np.abs(mu))
    out = np.where(dead[None, :], 0.0, centered / np.where(dead, 1.0, sd)[None, :])
    return FeatureMatrix(feats.kind, out, feats.frame_hop_s, feats.frame_len_s)
