"""Training-time dataset augmentation: speed, volume, random segmentation.

Speed and volume perturbation operate on waveforms and are materialized as
extra manifest entries (the audio itself is perturbed lazily at feature
extraction time). Random segmentation operates on feature frames during
mini-batch assembly.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.signal

from .audio import Waveform
from .features import FeatureMatrix

# Sentinel segment choice meaning "keep the full utterance".
ORIGINAL = "original"
SEGMENT_CHOICES_S = (2, 3, 4, 5, 6, 7, 8, 9, 10, ORIGINAL)

DEFAULT_SPEED_FACTORS = (0.9, 1.1)
DEFAULT_VOLUME_FACTORS = (0.25, 2.0)


@dataclass
class AugmentPolicy:
    speed_factors: tuple = ()
    volume_factors: tuple = ()
    random_segment: bool = False
    segment_choices_s: tuple = SEGMENT_CHOICES_S

    def __post_init__(self):
        for f in tuple(self.speed_factors) + tuple(self.volume_factors):
            if not (np.isfinite(f) and f > 0):
                raise ValueError(f"perturbation factors must be positive, got {f}")


def perturb_speed(waveform, factor):
    """Resample so the audio plays `factor` times faster.

    Band-limited polyphase (windowed-sinc) resampling by 1/factor; the
    nominal sample rate is unchanged, so a tone at f Hz lands at f*factor Hz
    and the duration scales by 1/factor.
    """
    if not 0.5 <= factor <= 2.0:
        raise ValueError(f"speed factor {factor} outside supported range [0.5, 2.0]")
    frac = Fraction(factor).limit_denominator(1000)
    if frac == 1:
        return Waveform(waveform.samples.copy(), waveform.sample_rate_hz)
    out = scipy.signal.resample_poly(waveform.samples, up=frac.denominator,
                                     down=frac.numerator)
    return Waveform(out, waveform.sample_rate_hz)


def perturb_volume(waveform, gain):
    """Scale every sample by `gain`, clipping the result to [-1, 1]."""
    if gain <= 0:
        raise ValueError(f"volume gain must be positive, got {gain}")
    return Waveform(np.clip(waveform.samples * gain, -1.0, 1.0),
                    waveform.sample_rate_hz)


def provenance_tag(kind, factor):
    return f"{kind}={float(factor)!r}"


def apply_provenance(waveform, provenance):
    """Apply a recorded perturbation ("orig", "speed=0.9", "vol=2") to audio."""
    if provenance in ("", "orig"):
        return waveform
    kind, _, value = provenance.partition("=")
    if kind == "speed":
        return perturb_speed(waveform, float(value))
    if kind == "vol":
        return perturb_volume(waveform, float(value))
    raise ValueError(f"unknown provenance tag {provenance!r}")


def expand_corpus(rows, policy):
    """Emit original manifest rows plus one copy per enabled factor.

    Each row must expose .utterance_id and support .replaced(utterance_id=,
    provenance=) (see manifest.Row). Augmented ids get a "#speed=.."/"#vol=.."
    suffix; collisions with existing ids are an error.
    """
    out = list(rows)
    seen = {r.utterance_id for r in rows}
    if len(seen) != len(out):
        raise ValueError("duplicate utterance ids in input manifest")
    for row in rows:
        variants = [provenance_tag("speed", f) for f in policy.speed_factors]
        variants += [provenance_tag("vol", f) for f in policy.volume_factors]
        for tag in variants:
            new_id = f"{row.utterance_id}#{tag}"
            if new_id in seen:
                raise ValueError(f"duplicate augmented utterance id {new_id!r}")
            seen.add(new_id)
            out.append(row.replaced(utterance_id=new_id, provenance=tag))
    return out


def random_segment(feats, rng, choices_s=SEGMENT_CHOICES_S):
    """Crop a feature matrix to a randomly drawn length during training.

    Draws uniformly over `choices_s` (seconds, plus the ORIGINAL sentinel).
    ORIGINAL, or a draw longer than the utterance, returns the input
    unchanged; otherwise a uniformly placed contiguous slice is returned.
    """
    draw = choices_s[rng.integers(0, len(choices_s))]
    if draw == ORIGINAL:
        return feats
    want = round(draw / feats.frame_hop_s)
    t = feats.num_frames
    if t <= want:
        return feats
    start = int(rng.integers(0, t - want + 1))
    return FeatureMatrix(feats.kind, feats.frames[start:start + want],
                         feats.frame_hop_s, feats.frame_len_s)
