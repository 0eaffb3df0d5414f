import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formantkit import Signal
from formantkit.evaluate import (
    EvalConfig,
    GroundTruth,
    GroundTruthFormatError,
    aggregate_report,
    convert_vtr_fb,
    evaluate_utterance,
    fdr,
    fee,
    load_ground_truth,
    load_mask,
    mix_noise,
    save_ground_truth,
    white_noise,
)


def truth(rows):
    return GroundTruth(np.asarray(rows, dtype=float))


def hyp(rows):
    return np.asarray(rows, dtype=float)


class TestFdr:
    def test_exact_match_is_100(self):
        ref = truth([[500, 1500, 2500], [510, 1490, 2510]])
        assert np.allclose(fdr(hyp(ref.formants_hz), ref), [100.0, 100.0, 100.0])

    def test_relative_bound_rejects(self):
        # 200 Hz < 300 Hz but 200/500 = 0.4 >= 0.3: both conditions required
        ref = truth([[500, 1500, 2500]])
        got = fdr(hyp([[700, 1500, 2500]]), ref)
        assert np.allclose(got, [0.0, 100.0, 100.0])

    def test_within_both_bounds_accepts(self):
        ref = truth([[500, 1500, 2500]])
        got = fdr(hyp([[640, 1500, 2500]]), ref)  # 140 < 300, 0.28 < 0.3
        assert got[0] == 100.0

    def test_relative_boundary_strict(self):
        ref = truth([[500, 1500, 2500]])
        got = fdr(hyp([[650, 1500, 2500]]), ref)  # exactly 0.3 relative
        assert got[0] == 0.0

    def test_absolute_boundary_strict(self):
        ref = truth([[1500, 2000, 3000]])
        got = fdr(hyp([[1200, 2000, 3000]]), ref)  # exactly 300 Hz, 0.2 relative
        assert got[0] == 0.0

    def test_unassigned_slot_counts_as_miss(self):
        ref = truth([[500, 1500, 2500]])
        got = fdr(hyp([[0.0, 1500, 2500]]), ref)
        assert got[0] == 0.0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10 ** 6), st.floats(0.05, 1.0), st.floats(50.0, 600.0))
    def test_monotone_in_tolerances(self, seed, tau_r, tau_a):
        rng = np.random.default_rng(seed)
        ref = truth(rng.uniform(300, 3000, size=(20, 3)))
        h = hyp(ref.formants_hz + rng.normal(0, 200, size=(20, 3)))
        base = fdr(h, ref, EvalConfig(tau_r, tau_a))
        wider = fdr(h, ref, EvalConfig(tau_r * 1.5, tau_a + 100.0))
        assert np.all(wider >= base)

    def test_mask_excludes_frames(self):
        ref = truth([[500, 1500, 2500], [500, 1500, 2500]])
        h = hyp([[500, 1500, 2500], [5000, 5000, 5000]])
        got = fdr(h, ref, mask=np.array([True, False]))
        assert np.allclose(got, 100.0)

    def test_all_masked_is_error(self):
        ref = truth([[500, 1500, 2500]])
        with pytest.raises(ValueError):
            fdr(hyp([[500, 1500, 2500]]), ref, mask=np.array([False]))


class TestFee:
    def test_zero_for_exact(self):
        ref = truth([[500, 1500, 2500]])
        assert np.allclose(fee(hyp(ref.formants_hz), ref), 0.0)

    def test_arithmetic_mean(self):
        ref = truth([[1000, 2000, 3000], [1000, 2000, 3000]])
        h = hyp([[1100, 2000, 3000], [1300, 2000, 3000]])
        assert fee(h, ref)[0] == pytest.approx(200.0, abs=1e-12)

    def test_constant_bias(self):
        ref = truth([[500, 1500, 2500]] * 7)
        h = hyp([[500, 1550, 2500]] * 7)
        assert fee(h, ref)[1] == pytest.approx(50.0, abs=1e-12)

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        a = rng.uniform(300, 3000, size=(9, 3))
        b = a + rng.normal(0, 100, size=(9, 3))
        assert np.allclose(fee(hyp(a), truth(b)), fee(hyp(b), truth(a)))

    def test_truncates_to_common_length(self):
        ref = truth([[500, 1500, 2500]] * 10)
        h = hyp([[500, 1500, 2500]] * 7)
        scores = evaluate_utterance(h, ref)
        assert scores.frames == 7

    def test_detection_gated_variant(self):
        # one detected frame (delta 100) and one gross miss (delta 2000):
        # plain FEE averages both, the gated variant keeps the detected one
        ref = truth([[1000, 2000, 3000], [1000, 2000, 3000]])
        h = hyp([[1100, 2000, 3000], [3000, 2000, 3000]])
        plain = fee(h, ref)
        gated = fee(h, ref, gate=EvalConfig())
        assert plain[0] == pytest.approx(1050.0)
        assert gated[0] == pytest.approx(100.0)
        scores = evaluate_utterance(h, ref, gated=True)
        assert scores.gated_fee[0] == pytest.approx(100.0)


class TestMixNoise:
    def test_infinite_snr_is_identity(self):
        x = Signal(np.linspace(-0.5, 0.5, 1000), 8000)
        noise = white_noise(1000, 0)
        out = mix_noise(x, noise, np.inf)
        assert np.array_equal(out.samples, x.samples)

    def test_equal_power_at_zero_db(self):
        rng = np.random.default_rng(0)
        x = Signal(rng.uniform(-0.4, 0.4, 8000), 8000)
        p = np.mean(x.samples ** 2)
        noise = Signal(x.samples.copy(), 8000)  # identical power
        out = mix_noise(x, noise, 0.0, seed=3)
        added = out.samples - x.samples
        assert abs(np.mean(added ** 2) / p - 1.0) < 1e-9

    @pytest.mark.parametrize("snr", [0.0, 5.0, 10.0, 20.0])
    def test_requested_snr_achieved(self, snr):
        rng = np.random.default_rng(42)
        x = Signal(0.3 * np.sin(2 * np.pi * 220 * np.arange(16000) / 8000), 8000)
        noise = white_noise(4000, seed=9)
        out = mix_noise(x, noise, snr, seed=5)
        added = out.samples - x.samples
        measured = 10.0 * np.log10(np.mean(x.samples ** 2) / np.mean(added ** 2))
        assert abs(measured - snr) < 0.1

    def test_silent_speech_rejected(self):
        with pytest.raises(ValueError, match="silent"):
            mix_noise(Signal(np.zeros(100), 8000), white_noise(100, 0), 10.0)

    def test_heavy_clipping_warns(self):
        x = Signal(0.9 * np.ones(1000), 8000)
        noise = white_noise(1000, 1)
        with pytest.warns(UserWarning, match="clipped"):
            mix_noise(x, noise, -10.0, seed=2)


class TestGroundTruthIo:
    def test_round_trip(self, tmp_path):
        rows = np.array([[500.0, 1500.0, 2500.0]] * 3)
        path = tmp_path / "gt.csv"
        save_ground_truth(path, rows)
        gt = load_ground_truth(path)
        assert len(gt) == 3
        assert np.allclose(gt.formants_hz, rows)

    def test_wrong_spacing_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time_s,f1,f2,f3\n0.000,500,1500,2500\n0.012,500,1500,2500\n")
        with pytest.raises(GroundTruthFormatError, match="10 ms"):
            load_ground_truth(path)

    def test_negative_frequency_rejected(self, tmp_path):
        path = tmp_path / "neg.csv"
        path.write_text("time_s,f1,f2,f3\n0.000,-500,1500,2500\n")
        with pytest.raises(GroundTruthFormatError, match="positive"):
            load_ground_truth(path)

    def test_non_numeric_rejected(self, tmp_path):
        path = tmp_path / "nan.csv"
        path.write_text("time_s,f1,f2,f3\n0.000,foo,1500,2500\n")
        with pytest.raises(GroundTruthFormatError, match="non-numeric"):
            load_ground_truth(path)

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("time_s,f1,f2,f3\n")
        with pytest.raises(GroundTruthFormatError, match="no data"):
            load_ground_truth(path)

    def test_mask_file(self, tmp_path):
        path = tmp_path / "mask.txt"
        path.write_text("1\n0\n1\n")
        assert np.array_equal(load_mask(path), [True, False, True])


class TestVtrConverter:
    def test_synthetic_fb_round_trip(self, tmp_path):
        frames = np.array(
            [[0.5, 1.5, 2.5, 3.5, 0.08, 0.09, 0.12, 0.2]] * 4, dtype=">f4"
        )
        fb = tmp_path / "one.fb"
        fb.write_bytes(frames.tobytes())
        out = tmp_path / "one.csv"
        assert convert_vtr_fb(fb, out) == 4
        gt = load_ground_truth(out)
        assert np.allclose(gt.formants_hz, [[500.0, 1500.0, 2500.0]] * 4)

    def test_bad_size_rejected(self, tmp_path):
        fb = tmp_path / "bad.fb"
        fb.write_bytes(b"\x00" * 33)
        with pytest.raises(GroundTruthFormatError, match="32"):
            convert_vtr_fb(fb, tmp_path / "x.csv")


def test_aggregate_report_averages_per_utterance():
    ref1 = truth([[500, 1500, 2500]] * 4)
    ref2 = truth([[600, 1600, 2600]] * 4)
    s1 = evaluate_utterance(hyp(ref1.formants_hz), ref1)
    s2 = evaluate_utterance(hyp(ref2.formants_hz + 100.0), ref2)
    report = aggregate_report("test", [s1, s2])
    assert np.allclose(report.fdr, 100.0)
    assert np.allclose(report.fee, 50.0)
    assert report.frames == 8
    data = report.to_json_dict()
    assert data["utterances"] == 2 and data["method"] == "test"
