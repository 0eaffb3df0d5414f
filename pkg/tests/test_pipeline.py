import numpy as np
import pytest

from formantkit.pipeline import (
    AnalysisResult,
    PipelineConfig,
    analyze,
    config_from_dict,
    estimate_models,
    read_track_csv,
    write_candidates_csv,
    write_spectrogram_pgm,
    write_track_csv,
)
from formantkit.synth import SynthSegment, synthesize
from formantkit.tracker import FormantTrack


@pytest.fixture(scope="module")
def vowel():
    seg = SynthSegment(0.6, 140.0, [(700, 80), (1400, 90), (2600, 120)])
    sig, _ = synthesize([seg], seed=6)
    return sig


class TestConfig:
    def test_dotted_keys(self):
        cfg = config_from_dict({
            "estimator": "qcp-cov",
            "frame.ms": 20.0,
            "qcp.dq": 0.6,
            "qcp.pq": 0.1,
            "qcp.ramp": 3,
            "qcp.dfloor": 1e-4,
            "tracker.nominal_hz": [450, 1450, 2450, 3450],
            "tracker.transition_weight": 2.0,
            "eval.tau_a": 250.0,
        })
        assert cfg.estimator == "qcp-cov"
        assert cfg.frame_ms == 20.0
        assert cfg.qcp.dq == 0.6 and cfg.qcp.d_floor == 1e-4
        assert cfg.tracker.nominal_hz == (450.0, 1450.0, 2450.0, 3450.0)
        assert cfg.tau_a == 250.0

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config key"):
            config_from_dict({"frame.millis": 20.0})

    def test_base_not_mutated(self):
        base = PipelineConfig()
        config_from_dict({"qcp.dq": 0.5}, base)
        assert base.qcp.dq == 0.7

    def test_estimator_validated(self):
        cfg = PipelineConfig(estimator="praat")
        with pytest.raises(ValueError, match="estimator"):
            cfg.validate()


class TestAnalyze:
    @pytest.mark.parametrize("estimator", [
        "lp-acor", "lp-cov", "lp-fbcov", "qcp-acor", "qcp-cov", "qcp-fbcov",
    ])
    def test_allpole_paths_produce_tracks(self, vowel, estimator):
        cfg = PipelineConfig(estimator=estimator)
        result = analyze(vowel, cfg)
        assert isinstance(result, AnalysisResult)
        assert result.track.frequencies.shape[1] == 4
        assert result.n_frames == len(result.track.frequencies)
        # F1 lands near 700 on interior frames for every estimator
        f1 = result.track.frequencies[5:-5, 0]
        assert np.median(np.abs(f1 - 700.0)) < 60.0

    def test_dnn_requires_model(self, vowel):
        cfg = PipelineConfig(estimator="dnn")
        with pytest.raises(ValueError, match="model"):
            analyze(vowel, cfg)

    def test_qcp_fbcov_beats_lp_cov_at_200hz(self):
        # excitation-weighted analysis should not lose to plain covariance
        # on an impulse-train vowel with a known filter
        seg = SynthSegment(1.0, 200.0, [(700, 80), (1400, 90), (2600, 120)])
        sig, _ = synthesize([seg], seed=3)
        truth = np.array([700.0, 1400.0, 2600.0])
        errs = {}
        for est in ("lp-cov", "qcp-fbcov"):
            res = analyze(sig, PipelineConfig(estimator=est))
            hyp = res.track.frequencies[5:-5, :3]
            errs[est] = np.mean(np.abs(hyp - truth), axis=0)
        assert np.all(errs["qcp-fbcov"] <= errs["lp-cov"])


class TestArtifacts:
    def test_track_csv_round_trip(self, tmp_path):
        track = FormantTrack(
            np.array([[500.0, 1500.0, 2500.0, 0.0], [510.0, 1490.0, 0.0, 3500.0]]),
            0.01,
        )
        path = tmp_path / "t.csv"
        write_track_csv(path, track)
        back = read_track_csv(path)
        assert np.allclose(back.frequencies, track.frequencies)
        assert back.frame_period == pytest.approx(0.01)

    def test_candidates_csv_shape(self, tmp_path, vowel):
        cfg = PipelineConfig(estimator="lp-cov")
        result = analyze(vowel, cfg)
        path = tmp_path / "c.csv"
        write_candidates_csv(path, result.lattice, 5)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "frame_index,f1,f2,f3,f4,f5,l1,l2,l3,l4,l5"
        assert len(lines) == result.n_frames + 1

    def test_spectrogram_pgm(self, tmp_path, vowel):
        path = tmp_path / "s.pgm"
        write_spectrogram_pgm(path, vowel, PipelineConfig())
        payload = path.read_bytes()
        assert payload.startswith(b"P5\n")
        header, rest = payload.split(b"255\n", 1)
        dims = header.split(b"\n")[1].split()
        assert int(dims[0]) * int(dims[1]) == len(rest)
