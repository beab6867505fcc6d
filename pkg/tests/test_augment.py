import numpy as np
import pytest

from conftest import tone
from dialectid.augment import (ORIGINAL, SEGMENT_CHOICES_S, AugmentPolicy,
                               apply_provenance, expand_corpus, perturb_speed,
                               perturb_volume, random_segment)
from dialectid.features import MFCC, FeatureMatrix
from dialectid.manifest import Row


def dominant_frequency(waveform):
    spec = np.abs(np.fft.rfft(waveform.samples))
    return np.argmax(spec) * waveform.sample_rate_hz / len(waveform.samples)


def make_rows(n):
    return [Row(f"utt{i:03d}", f"utt{i:03d}.wav", "", "A", "TRAIN") for i in range(n)]


class TestSpeed:
    def test_identity_factor(self):
        w = tone(440, 1.0)
        out = perturb_speed(w, 1.0)
        assert len(out.samples) == len(w.samples)
        np.testing.assert_array_equal(out.samples, w.samples)

    def test_output_length(self):
        w = tone(440, 1.0)  # 16000 samples
        out = perturb_speed(w, 0.9)
        assert abs(len(out.samples) - round(16000 / 0.9)) <= 1
        assert out.sample_rate_hz == 16000

    def test_tone_shifts_up_by_factor(self):
        out = perturb_speed(tone(440, 1.0), 1.1)
        assert abs(dominant_frequency(out) - 484.0) <= 0.02 * 484.0

    def test_tone_shifts_down_by_factor(self):
        out = perturb_speed(tone(440, 1.0), 0.9)
        assert abs(dominant_frequency(out) - 396.0) <= 0.02 * 396.0

    def test_factor_bounds(self):
        w = tone(440, 0.1)
        for bad in (0.4, 2.5, 0.0):
            with pytest.raises(ValueError, match="speed factor"):
                perturb_speed(w, bad)


class TestVolume:
    def test_identity_gain(self):
        w = tone(440, 0.2)
        np.testing.assert_array_equal(perturb_volume(w, 1.0).samples, w.samples)

    def test_scales_amplitude(self):
        w = tone(440, 0.2, amp=0.8)
        out = perturb_volume(w, 0.25)
        assert abs(np.max(np.abs(out.samples)) - 0.2) < 1e-12
        assert len(out.samples) == len(w.samples)

    def test_clipping(self):
        w = tone(100, 0.05, amp=0.9)
        out = perturb_volume(w, 2.0)
        assert np.max(out.samples) == 1.0
        assert np.min(out.samples) == -1.0

    def test_inverse_gain_round_trip_without_clipping(self):
        # Exact only for power-of-two gains (the defaults are 0.25 and 2.0).
        w = tone(440, 0.2, amp=0.3)
        for g in (0.25, 2.0):
            back = perturb_volume(perturb_volume(w, g), 1.0 / g)
            np.testing.assert_array_equal(back.samples, w.samples)

    def test_gain_must_be_positive(self):
        with pytest.raises(ValueError, match="positive"):
            perturb_volume(tone(440, 0.1), 0.0)


class TestExpandCorpus:
    def test_speed_only_triples(self):
        rows = expand_corpus(make_rows(100), AugmentPolicy(speed_factors=(0.9, 1.1)))
        assert len(rows) == 300

    def test_speed_and_volume_quintuples(self):
        rows = expand_corpus(make_rows(100),
                             AugmentPolicy(speed_factors=(0.9, 1.1),
                                           volume_factors=(0.25, 2.0)))
        assert len(rows) == 500
        tags = {r.provenance for r in rows}
        assert tags == {"orig", "speed=0.9", "speed=1.1", "vol=0.25", "vol=2.0"}

    def test_empty_policy_is_identity(self):
        rows = make_rows(10)
        assert expand_corpus(rows, AugmentPolicy()) == rows

    def test_labels_and_paths_copied(self):
        rows = expand_corpus(make_rows(2), AugmentPolicy(speed_factors=(1.1,)))
        aug = [r for r in rows if r.provenance != "orig"]
        assert all(r.dialect == "A" and r.path.endswith(".wav") for r in aug)
        assert {r.utterance_id for r in aug} == {"utt000#speed=1.1", "utt001#speed=1.1"}

    def test_duplicate_augmented_id_rejected(self):
        rows = make_rows(1) + [Row("utt000#speed=1.1", "x.wav", "", "A", "TRAIN")]
        with pytest.raises(ValueError, match="duplicate"):
            expand_corpus(rows, AugmentPolicy(speed_factors=(1.1,)))


class TestApplyProvenance:
    def test_orig_passthrough(self):
        w = tone(440, 0.1)
        assert apply_provenance(w, "orig") is w

    def test_speed_tag(self):
        w = tone(440, 1.0)
        out = apply_provenance(w, "speed=0.9")
        assert abs(len(out.samples) - round(16000 / 0.9)) <= 1

    def test_unknown_tag_rejected(self):
        with pytest.raises(ValueError, match="provenance"):
            apply_provenance(tone(440, 0.1), "reverb=0.3")


class TestRandomSegment:
    def make_feats(self, t):
        return FeatureMatrix(MFCC, np.arange(t * 40, dtype=float).reshape(t, 40))

    def test_original_choice_returns_input(self):
        feats = self.make_feats(500)
        out = random_segment(feats, np.random.default_rng(0), choices_s=(ORIGINAL,))
        assert out is feats

    def test_draw_shorter_than_utterance(self):
        feats = self.make_feats(1200)
        out = random_segment(feats, np.random.default_rng(1), choices_s=(4,))
        assert out.num_frames == 400
        # contiguous slice: row content identifies the start offset
        start = int(out.frames[0, 0] // 40)
        assert 0 <= start <= 800
        np.testing.assert_array_equal(out.frames, feats.frames[start:start + 400])

    def test_too_short_utterance_unchanged(self):
        feats = self.make_feats(150)
        out = random_segment(feats, np.random.default_rng(2), choices_s=(5,))
        assert out is feats

    def test_choices_are_uniform(self):
        rng = np.random.default_rng(3)
        feats = self.make_feats(1100)  # longer than every choice
        hits = {c: 0 for c in SEGMENT_CHOICES_S}
        for _ in range(10000):
            out = random_segment(feats, rng)
            seconds = ORIGINAL if out.num_frames == 1100 else out.num_frames // 100
            hits[seconds] += 1
        for c in SEGMENT_CHOICES_S:
            assert abs(hits[c] / 10000 - 0.1) < 0.02, (c, hits[c])

    def test_slices_always_in_bounds_fuzz(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            t = int(rng.integers(50, 1500))
            feats = self.make_feats(t)
            out = random_segment(feats, rng)
            assert 1 <= out.num_frames <= t
            first = out.frames[0, 0]
            start = int(first // 40)
            np.testing.assert_array_equal(
                out.frames, feats.frames[start:start + out.num_frames])


def test_policy_validates_factors():
    with pytest.raises(ValueError, match="positive"):
        AugmentPolicy(speed_factors=(0.9, -1.0))
