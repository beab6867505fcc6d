"""Waveform container and 16-bit PCM WAV I/O."""

import wave
from dataclasses import dataclass

import numpy as np

EXPECTED_SAMPLE_RATE = 16000


@dataclass
class Waveform:
    """Mono audio: float64 samples (nominally in [-1, 1]) plus sample rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError("waveform must be a non-empty 1-d sample sequence")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("waveform contains non-finite samples")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample rate must be positive")

    @property
    def duration_s(self):
        return len(self.samples) / self.sample_rate_hz


def read_wav(path):
    """Read a mono 16-bit PCM WAV file (path or file object) into a Waveform.

    Stereo or non-16-bit files are rejected; no resampling is performed,
    the file's own rate is kept.
    """
    source = path if hasattr(path, "read") else str(path)
    with wave.open(source, "rb") as f:
        if f.getnchannels() != 1:
            raise ValueError(f"{path}: expected mono audio, got {f.getnchannels()} channels")
        if f.getsampwidth() != 2:
            raise ValueError(f"{path}: expected 16-bit PCM, got {8 * f.getsampwidth()}-bit")
        rate = f.getframerate()
        raw = f.readframes(f.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return Waveform(samples, rate)


def write_wav(path, waveform):
    """Write a Waveform as mono 16-bit PCM; samples are clipped to [-1, 1]."""
    pcm = np.clip(np.rint(waveform.samples * 32767.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(waveform.sample_rate_hz)
        f.writeframes(pcm.tobytes())


def require_rate(waveform, path="<waveform>"):
    """Reject audio whose rate differs from the 16 kHz the front end assumes."""
    if waveform.sample_rate_hz != EXPECTED_SAMPLE_RATE:
        raise ValueError(
            f"{path}: sample rate {waveform.sample_rate_hz} Hz unsupported, "
            f"expected {EXPECTED_SAMPLE_RATE} Hz (no resampling is done)"
        )
    return waveform
