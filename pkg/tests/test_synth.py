import json

import numpy as np
import pytest

from formantkit import Frame, estimate_f0, lp_covariance, pre_emphasize
from formantkit.peaks import allpole_spectrum_db, pick_peaks, select_candidates
from formantkit.synth import (
    SynthSegment,
    SynthSpecError,
    formant_filter,
    ground_truth_rows,
    impulse_train,
    load_synth_spec,
    synthesize,
)


class TestSynthesize:
    def test_round_trip_formant_recovery(self):
        # analysis of the rendered vowel recovers the synthesis formants
        seg = SynthSegment(1.0, 120.0, [(700, 80), (1200, 90), (2500, 120)])
        sig, _ = synthesize([seg], seed=2)
        pre = pre_emphasize(sig, 0.5)
        errors = []
        for start in range(1600, 6000, 400):
            frame = Frame(pre.samples[start:start + 200], start)
            model = lp_covariance(frame, 12)
            cands = select_candidates(
                pick_peaks(allpole_spectrum_db(model, 1024), 8000), 5
            )
            got = sorted(c.frequency for c in cands)[:3]
            errors.append(np.abs(np.array(got) - [700.0, 1200.0, 2500.0]))
        assert np.mean(errors, axis=0).max() < 20.0

    def test_noise_segment_is_unvoiced(self):
        # fricative-like bandwidths; narrow resonances would ring periodically
        seg = SynthSegment(1.0, 0.0, [(700, 300), (1200, 350), (2500, 400)])
        sig, _ = synthesize([seg], seed=3)
        pitch = estimate_f0(sig)
        assert np.mean(pitch.voiced) < 0.2

    def test_impulse_train_instants(self):
        exc, instants = impulse_train(800, 100.0, 8000)
        assert np.array_equal(instants, np.arange(0, 800, 80))
        assert exc.sum() == len(instants)

    def test_crossfade_length_accounting(self):
        segs = [
            SynthSegment(0.5, 120.0, [(700, 80), (1200, 90), (2500, 120)]),
            SynthSegment(0.5, 0.0, [(400, 80), (900, 90), (2200, 120)]),
        ]
        sig, owner = synthesize(segs, seed=1)
        assert len(sig.samples) == 4000 + 4000 - 80
        assert owner[0] == 0 and owner[-1] == 1

    def test_peak_normalized(self):
        seg = SynthSegment(0.5, 200.0, [(700, 80), (1200, 90), (2500, 120)])
        sig, _ = synthesize([seg], seed=1)
        assert np.max(np.abs(sig.samples)) == pytest.approx(0.9)

    def test_determinism(self):
        seg = SynthSegment(0.3, 0.0, [(700, 80), (1200, 90), (2500, 120)])
        a, _ = synthesize([seg], seed=5)
        b, _ = synthesize([seg], seed=5)
        assert np.array_equal(a.samples, b.samples)


class TestValidation:
    def test_formant_above_nyquist(self):
        seg = SynthSegment(0.5, 120.0, [(5000, 80)])
        with pytest.raises(SynthSpecError, match="5000"):
            seg.validate(8000)

    def test_nonpositive_duration(self):
        with pytest.raises(SynthSpecError):
            SynthSegment(0.0, 120.0, [(700, 80)]).validate(8000)

    def test_filter_order_matches_pairs(self):
        a = formant_filter([(700, 80), (1200, 90)])
        assert len(a) == 5


class TestSpecFile:
    def test_load(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(json.dumps([
            {"duration_s": 0.5, "f0_hz": 150,
             "formants": [[700, 80], [1200, 90], [2500, 120]]}
        ]))
        segs = load_synth_spec(path)
        assert len(segs) == 1
        assert segs[0].formants[1] == (1200.0, 90.0)

    def test_not_a_list(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{}")
        with pytest.raises(SynthSpecError):
            load_synth_spec(path)

    def test_missing_key(self, tmp_path):
        path = tmp_path / "bad2.json"
        path.write_text(json.dumps([{"duration_s": 0.5}]))
        with pytest.raises(SynthSpecError):
            load_synth_spec(path)


def test_ground_truth_rows_align_with_frames():
    segs = [
        SynthSegment(0.5, 120.0, [(700, 80), (1200, 90), (2500, 120)]),
        SynthSegment(0.5, 150.0, [(400, 80), (900, 90), (2200, 120)]),
    ]
    sig, owner = synthesize(segs, seed=1)
    rows = ground_truth_rows(segs, owner, sig.sample_rate)
    n_frames = (len(sig.samples) - 200) // 80 + 1
    assert rows.shape == (n_frames, 3)
    assert np.allclose(rows[0], [700, 1200, 2500])
    assert np.allclose(rows[-1], [400, 900, 2200])
