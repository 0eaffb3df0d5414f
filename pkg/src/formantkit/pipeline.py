"""End-to-end analysis pipeline and its configuration."""

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from . import allpole, mlp
from .dsp import (
    DEFAULT_FRAME_MS,
    DEFAULT_HOP_MS,
    DEFAULT_PREEMPHASIS,
    HAMMING,
    RECTANGULAR,
    Signal,
    apply_window,
    frame_signal,
    magnitude_spectrum_db,
    pre_emphasize,
)
from .features import rasta_plp, stack_context
from .glottal import QcpParams, build_qcp_weights, detect_gci, estimate_f0
from .peaks import (
    DEFAULT_GAUSS_WIDTH_HZ,
    DEFAULT_MAX_CANDIDATES,
    DEFAULT_NFFT,
    CandidateLattice,
    allpole_spectrum_db,
    pick_peaks,
    select_candidates,
)
from .refine import refine_formants
from .tracker import FormantTrack, TrackerConfig, track_dp

ALLPOLE_ESTIMATORS = ("lp-acor", "lp-cov", "lp-fbcov", "qcp-acor", "qcp-cov", "qcp-fbcov")
DNN_ESTIMATORS = ("dnn", "dnn-lp-fbcov", "dnn-qcp-fbcov")
ESTIMATORS = ALLPOLE_ESTIMATORS + DNN_ESTIMATORS

_REFINE_BACKEND = {"dnn-lp-fbcov": "lp-fbcov", "dnn-qcp-fbcov": "qcp-fbcov"}


@dataclass
class PipelineConfig:
    estimator: str = "qcp-fbcov"
    frame_ms: float = DEFAULT_FRAME_MS
    hop_ms: float = DEFAULT_HOP_MS
    order: int = allpole.DEFAULT_ORDER
    preemphasis: float = DEFAULT_PREEMPHASIS
    nfft: int = DEFAULT_NFFT
    gauss_width_hz: float = DEFAULT_GAUSS_WIDTH_HZ
    n_candidates: int = DEFAULT_MAX_CANDIDATES
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    qcp: QcpParams = field(default_factory=QcpParams)
    model_path: str | None = None
    tau_r: float = 0.3
    tau_a: float = 300.0
    seed: int = 0

    def validate(self):
        if self.estimator not in ESTIMATORS:
            raise ValueError(
                f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}"
            )
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be >= 1")
        self.tracker.validate()
        self.qcp.validate()


# flat dotted keys accepted in JSON config files
CONFIG_KEYS = {
    "estimator": ("estimator", str),
    "frame.ms": ("frame_ms", float),
    "hop.ms": ("hop_ms", float),
    "order": ("order", int),
    "preemphasis.alpha": ("preemphasis", float),
    "nfft": ("nfft", int),
    "peaks.gauss_width_hz": ("gauss_width_hz", float),
    "peaks.candidates": ("n_candidates", int),
    "dnn.model": ("model_path", str),
    "eval.tau_r": ("tau_r", float),
    "eval.tau_a": ("tau_a", float),
    "seed": ("seed", int),
}
TRACKER_KEYS = {
    "tracker.nominal_hz": ("nominal_hz", lambda v: tuple(float(x) for x in v)),
    "tracker.stationary_weight": ("stationary_weight", float),
    "tracker.transition_weight": ("transition_weight", float),
    "tracker.missing_penalty": ("missing_penalty", float),
}
QCP_KEYS = {
    "qcp.dq": ("dq", float),
    "qcp.pq": ("pq", float),
    "qcp.ramp": ("ramp_samples", int),
    "qcp.dfloor": ("d_floor", float),
}


def config_from_dict(data: dict, base: PipelineConfig | None = None) -> PipelineConfig:
    cfg = base or PipelineConfig()
    cfg = replace(cfg, tracker=replace(cfg.tracker), qcp=replace(cfg.qcp))
    for key, value in data.items():
        if key in CONFIG_KEYS:
            attr, conv = CONFIG_KEYS[key]
            setattr(cfg, attr, conv(value))
        elif key in TRACKER_KEYS:
            attr, conv = TRACKER_KEYS[key]
            setattr(cfg.tracker, attr, conv(value))
        elif key in QCP_KEYS:
            attr, conv = QCP_KEYS[key]
            setattr(cfg.qcp, attr, conv(value))
        else:
            raise ValueError(f"unknown config key {key!r}")
    return cfg


@dataclass
class AnalysisResult:
    track: FormantTrack
    lattice: CandidateLattice | None
    n_frames: int


def estimate_models(signal: Signal, config: PipelineConfig) -> list[allpole.AllPoleModel]:
    """Per-frame all-pole models for one of the six estimators."""
    tag = config.estimator
    if tag not in ALLPOLE_ESTIMATORS:
        raise ValueError(f"not an all-pole estimator: {tag!r}")
    emphasized = pre_emphasize(signal, config.preemphasis)
    frames = frame_signal(emphasized, config.frame_ms, config.hop_ms)
    window = HAMMING if tag.endswith("acor") else RECTANGULAR
    p = config.order

    weights_per_frame = None
    if tag.startswith("qcp"):
        pitch = estimate_f0(signal, config.frame_ms, config.hop_ms)
        gcis = detect_gci(signal, pitch, p)
        extra = p if tag == "qcp-acor" else 0
        weights_per_frame = [
            build_qcp_weights(
                f.start_index, len(f) + extra, gcis, config.qcp, signal.sample_rate
            )
            for f in frames
        ]

    models = []
    for i, frame in enumerate(frames):
        windowed = apply_window(frame, window)
        if tag == "lp-acor":
            models.append(allpole.lp_autocorrelation(windowed, p))
        elif tag == "lp-cov":
            models.append(allpole.lp_covariance(windowed, p))
        elif tag == "lp-fbcov":
            models.append(allpole.lp_forward_backward_cov(windowed, p))
        else:
            mode = tag.split("-", 1)[1]
            models.append(
                allpole.qcp_variant(windowed, p, weights_per_frame[i], mode)
            )
    return models


def candidate_lattice(
    models: list[allpole.AllPoleModel], config: PipelineConfig, sample_rate: int
) -> CandidateLattice:
    frames = []
    for model in models:
        spectrum = allpole_spectrum_db(model, config.nfft)
        cands = pick_peaks(spectrum, sample_rate, config.gauss_width_hz)
        frames.append(select_candidates(cands, config.n_candidates))
    return CandidateLattice(frames, config.hop_ms / 1000.0)


def analyze(
    signal: Signal,
    config: PipelineConfig,
    model: mlp.MlpModel | None = None,
) -> AnalysisResult:
    """Run the configured estimator and tracker over one utterance."""
    config.validate()
    if config.estimator in ALLPOLE_ESTIMATORS:
        models = estimate_models(signal, config)
        lattice = candidate_lattice(models, config, signal.sample_rate)
        track = track_dp(lattice, config.tracker)
        return AnalysisResult(track, lattice, len(lattice))
    return _analyze_dnn(signal, config, model)


def _analyze_dnn(
    signal: Signal, config: PipelineConfig, model: mlp.MlpModel | None
) -> AnalysisResult:
    if model is None:
        raise ValueError(f"estimator {config.estimator!r} requires a trained model")
    frames = frame_signal(signal, config.frame_ms, config.hop_ms)
    feats = rasta_plp(frames, signal.sample_rate)
    context = stack_context(feats)
    predicted = np.sort(mlp.forward(model, context), axis=1)

    lattice = None
    if config.estimator in _REFINE_BACKEND:
        backend = replace(config, estimator=_REFINE_BACKEND[config.estimator])
        models = estimate_models(signal, backend)
        peak_lists = []
        for m in models:
            spectrum = allpole_spectrum_db(m, config.nfft)
            peak_lists.append(pick_peaks(spectrum, signal.sample_rate, config.gauss_width_hz))
        refined = np.stack([
            refine_formants(predicted[i], peak_lists[i])
            for i in range(len(frames))
        ])
        predicted = refined
        lattice = CandidateLattice(
            [select_candidates(pl, config.n_candidates) for pl in peak_lists],
            config.hop_ms / 1000.0,
        )
    freqs = np.zeros((len(frames), 4))
    freqs[:, :3] = predicted
    track = FormantTrack(freqs, config.hop_ms / 1000.0)
    return AnalysisResult(track, lattice, len(frames))


def write_track_csv(path, track: FormantTrack) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        n_slots = track.frequencies.shape[1]
        writer.writerow(["frame_index", "time_s"] + [f"f{i + 1}" for i in range(n_slots)])
        for i, row in enumerate(track.frequencies):
            writer.writerow(
                [i, f"{i * track.frame_period:.3f}"] + [f"{v:.3f}" for v in row]
            )


def read_track_csv(path) -> FormantTrack:
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if rows and not rows[0][1].replace(".", "").isdigit():
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no track rows")
    period = 0.01
    if len(rows) > 1:
        period = float(rows[1][1]) - float(rows[0][1])
    freqs = np.array([[float(v) for v in row[2:]] for row in rows])
    return FormantTrack(freqs, period)


def write_candidates_csv(path, lattice: CandidateLattice, k: int) -> None:
    """Frame-indexed candidate dump; empty cells where fewer than k peaks exist."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["frame_index"]
            + [f"f{i + 1}" for i in range(k)]
            + [f"l{i + 1}" for i in range(k)]
        )
        for i, cands in enumerate(lattice.frames):
            freqs = [f"{c.frequency:.3f}" for c in cands] + [""] * (k - len(cands))
            levels = [f"{c.level_db:.3f}" for c in cands] + [""] * (k - len(cands))
            writer.writerow([i] + freqs[:k] + levels[:k])


def write_spectrogram_pgm(path, signal: Signal, config: PipelineConfig) -> None:
    """Debug spectrogram as a binary PGM (rows from Nyquist down to DC)."""
    frames = frame_signal(signal, config.frame_ms, config.hop_ms)
    if not frames:
        raise ValueError("signal shorter than one frame")
    spec = np.stack([
        magnitude_spectrum_db(apply_window(f, HAMMING).samples, config.nfft)
        for f in frames
    ])
    lo, hi = spec.min(), spec.max()
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    img = ((spec - lo) * scale).astype(np.uint8).T[::-1]
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        fh.write(img.tobytes())
