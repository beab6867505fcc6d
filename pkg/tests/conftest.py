import numpy as np

from dialectid.audio import Waveform


def tone(freq_hz, duration_s=1.0, rate=16000, amp=0.5, phase=0.0):
    t = np.arange(int(round(duration_s * rate))) / rate
    return Waveform(amp * np.sin(2 * np.pi * freq_hz * t + phase), rate)


def noise(duration_s=1.0, rate=16000, amp=0.1, seed=0):
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * rate))
    return Waveform(np.clip(amp * rng.standard_normal(n), -1.0, 1.0), rate)


def relative_error(a, b, floor=1e-10):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.max(np.abs(a - b) / np.maximum(np.abs(a) + np.abs(b), floor))
