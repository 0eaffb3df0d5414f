"""Detection-rate and estimation-error metrics, noise mixing, ground-truth files."""

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dsp import Signal

DEFAULT_TAU_R = 0.3
DEFAULT_TAU_A = 300.0
GT_FRAME_PERIOD_S = 0.01
GT_PERIOD_TOL_S = 1e-4
CLIP_WARN_FRACTION = 1e-3
N_REPORTED_FORMANTS = 3


class GroundTruthFormatError(Exception):
    """Raised for malformed ground-truth files."""


@dataclass
class EvalConfig:
    tau_r: float = DEFAULT_TAU_R
    tau_a: float = DEFAULT_TAU_A

    def validate(self):
        if self.tau_r <= 0 or self.tau_a <= 0:
            raise ValueError("tau_r and tau_a must be positive")


@dataclass
class GroundTruth:
    formants_hz: np.ndarray          # (n_frames, 3)
    mask: np.ndarray | None = None   # optional per-frame inclusion flags

    def __len__(self) -> int:
        return len(self.formants_hz)


@dataclass
class UtteranceScores:
    fdr: np.ndarray  # percent, per formant
    fee: np.ndarray  # Hz, per formant
    frames: int
    gated_fee: np.ndarray | None = None  # Hz over detected frames only


@dataclass
class EvalReport:
    method: str
    fdr: np.ndarray
    fee: np.ndarray
    frames: int
    per_utterance: list[UtteranceScores] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "fdr": [round(float(v), 4) for v in self.fdr],
            "fee": [round(float(v), 4) for v in self.fee],
            "frames": int(self.frames),
            "utterances": len(self.per_utterance),
        }


def _deviations(hyp: np.ndarray, ref: GroundTruth, mask=None):
    hyp = np.atleast_2d(np.asarray(hyp, dtype=np.float64))
    n = min(len(hyp), len(ref.formants_hz))
    if mask is None:
        mask = ref.mask
    include = np.ones(n, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)[:n]
    m = int(np.sum(include))
    if m == 0:
        raise ValueError("no frames left after masking")
    rf = ref.formants_hz[:n][include]
    hf = hyp[:n, :N_REPORTED_FORMANTS][include]
    return np.abs(rf - hf), rf, m


def fdr(hyp: np.ndarray, ref: GroundTruth, cfg: EvalConfig | None = None, mask=None) -> np.ndarray:
    """Per-formant detection rate (percent): frames within both deviation bounds.

    A frame counts as detected only when the relative deviation is strictly
    below tau_r and the absolute deviation strictly below tau_a.
    """
    cfg = cfg or EvalConfig()
    cfg.validate()
    delta, rf, m = _deviations(hyp, ref, mask)
    detected = (delta / rf < cfg.tau_r) & (delta < cfg.tau_a)
    return 100.0 * detected.sum(axis=0) / m


def fee(
    hyp: np.ndarray,
    ref: GroundTruth,
    mask=None,
    gate: EvalConfig | None = None,
) -> np.ndarray:
    """Per-formant mean absolute deviation in Hz over all included frames.

    When `gate` is given, the average runs only over frames the detector
    accepts for that formant (secondary, detection-gated variant).
    """
    delta, rf, m = _deviations(hyp, ref, mask)
    if gate is None:
        return delta.sum(axis=0) / m
    gate.validate()
    detected = (delta / rf < gate.tau_r) & (delta < gate.tau_a)
    counts = detected.sum(axis=0)
    out = np.zeros(delta.shape[1])
    for i in range(delta.shape[1]):
        out[i] = delta[detected[:, i], i].mean() if counts[i] else np.nan
    return out


def evaluate_utterance(
    hyp: np.ndarray, ref: GroundTruth, cfg: EvalConfig | None = None, mask=None,
    gated: bool = False,
) -> UtteranceScores:
    delta, rf, m = _deviations(hyp, ref, mask)
    cfg = cfg or EvalConfig()
    cfg.validate()
    detected = (delta / rf < cfg.tau_r) & (delta < cfg.tau_a)
    gated_fee = None
    if gated:
        gated_fee = np.array([
            delta[detected[:, i], i].mean() if detected[:, i].any() else np.nan
            for i in range(delta.shape[1])
        ])
    return UtteranceScores(
        100.0 * detected.sum(axis=0) / m, delta.sum(axis=0) / m, m, gated_fee
    )


def aggregate_report(method: str, scores: list[UtteranceScores]) -> EvalReport:
    """Average per-utterance metrics, mirroring corpus-level reporting."""
    if not scores:
        raise ValueError("no utterance scores to aggregate")
    fdr_mean = np.mean([s.fdr for s in scores], axis=0)
    fee_mean = np.mean([s.fee for s in scores], axis=0)
    frames = int(sum(s.frames for s in scores))
    return EvalReport(method, fdr_mean, fee_mean, frames, list(scores))


def white_noise(n: int, seed: int) -> Signal:
    """Zero-mean uniform noise in [-1, 1) at 8 kHz."""
    rng = np.random.default_rng(seed)
    return Signal(rng.uniform(-1.0, 1.0, size=n), 8000)


def mix_noise(signal: Signal, noise: Signal, snr_db: float, seed: int = 0) -> Signal:
    """Add noise scaled to the requested SNR over the whole utterance.

    snr_db = inf returns the input unchanged. The noise is wrapped from a
    seed-derived start offset so it covers the signal, then the mix is clipped
    to [-1, 1] with a warning when more than 0.1% of samples clip.
    """
    if np.isposinf(snr_db):
        return Signal(signal.samples.copy(), signal.sample_rate)
    if not np.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite or +inf, got {snr_db}")
    x = signal.samples
    p_speech = float(np.mean(x * x))
    if p_speech <= 0.0:
        raise ValueError("cannot set an SNR for silent speech")
    rng = np.random.default_rng(seed)
    offset = int(rng.integers(0, len(noise.samples)))
    idx = (offset + np.arange(len(x))) % len(noise.samples)
    n = noise.samples[idx]
    p_noise = float(np.mean(n * n))
    if p_noise <= 0.0:
        raise ValueError("noise signal has zero power")
    scale = np.sqrt(p_speech / (p_noise * 10.0 ** (snr_db / 10.0)))
    mixed = x + scale * n
    clipped = np.abs(mixed) > 1.0
    if np.mean(clipped) > CLIP_WARN_FRACTION:
        warnings.warn(
            f"{100.0 * np.mean(clipped):.2f}% of samples clipped while mixing noise"
        )
    return Signal(np.clip(mixed, -1.0, 1.0), signal.sample_rate)


def load_ground_truth(path) -> GroundTruth:
    """Read the canonical CSV (time_s, f1, f2, f3 at 10 ms steps)."""
    try:
        with open(path, newline="") as fh:
            raw = [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise GroundTruthFormatError(f"{path}: {exc}") from exc
    if raw and not _is_number(raw[0][0]):
        raw = raw[1:]  # header row
    if not raw:
        raise GroundTruthFormatError(f"{path}: no data rows")
    times, rows = [], []
    for row in raw:
        if len(row) < 4:
            raise GroundTruthFormatError(f"{path}: expected 4 columns, got {row}")
        try:
            vals = [float(v) for v in row[:4]]
        except ValueError as exc:
            raise GroundTruthFormatError(f"{path}: non-numeric value in {row}") from exc
        times.append(vals[0])
        rows.append(vals[1:])
    formants = np.asarray(rows)
    if np.any(formants <= 0) or not np.all(np.isfinite(formants)):
        raise GroundTruthFormatError(f"{path}: formants must be positive and finite")
    spacing = np.diff(np.asarray(times))
    if len(spacing) and np.any(np.abs(spacing - GT_FRAME_PERIOD_S) > GT_PERIOD_TOL_S):
        raise GroundTruthFormatError(f"{path}: frame spacing must be 10 ms +- 0.1 ms")
    return GroundTruth(formants)


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def save_ground_truth(path, formants_hz: np.ndarray) -> None:
    formants_hz = np.atleast_2d(formants_hz)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "f1", "f2", "f3"])
        for i, row in enumerate(formants_hz):
            writer.writerow([f"{i * GT_FRAME_PERIOD_S:.3f}"] + [f"{v:.3f}" for v in row[:3]])


def load_mask(path) -> np.ndarray:
    """Frame-inclusion hook: one 0/1 per line."""
    with open(path) as fh:
        vals = [line.strip() for line in fh if line.strip()]
    try:
        return np.array([int(v) for v in vals], dtype=bool)
    except ValueError as exc:
        raise GroundTruthFormatError(f"{path}: mask entries must be 0 or 1") from exc


def convert_vtr_fb(fb_path, csv_path) -> int:
    """Best-effort converter for VTR .fb files (big-endian f32, 8 values/frame).

    Frames carry F1..F4 in kHz then B1..B4; the first three formants are written
    to the canonical CSV in Hz. Returns the frame count.
    """
    with open(fb_path, "rb") as fh:
        payload = fh.read()
    if len(payload) % 32:
        raise GroundTruthFormatError(
            f"{fb_path}: size {len(payload)} is not a multiple of 32 bytes"
        )
    n = len(payload) // 32
    if n == 0:
        raise GroundTruthFormatError(f"{fb_path}: no frames")
    frames = np.frombuffer(payload, dtype=">f4").reshape(n, 8)
    formants = frames[:, :3].astype(np.float64) * 1000.0
    if np.any(formants <= 0):
        raise GroundTruthFormatError(f"{fb_path}: non-positive formant values")
    save_ground_truth(csv_path, formants)
    return n
