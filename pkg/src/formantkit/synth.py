"""Synthetic test-signal generator: impulse-train or noise excited all-pole vowels."""

import json
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .dsp import Signal

SYNTH_RATE = 8000
CROSSFADE_S = 0.01
PEAK_LEVEL = 0.9


class SynthSpecError(Exception):
    """Raised for invalid synthesis specifications."""


@dataclass
class SynthSegment:
    duration_s: float
    f0_hz: float                       # 0 selects white-noise excitation
    formants: list[tuple[float, float]]  # (frequency, bandwidth) pairs

    def validate(self, sample_rate: int):
        if self.duration_s <= 0:
            raise SynthSpecError(f"segment duration must be > 0, got {self.duration_s}")
        if self.f0_hz < 0:
            raise SynthSpecError(f"f0 must be >= 0, got {self.f0_hz}")
        for f, bw in self.formants:
            if not 0 < f < sample_rate / 2:
                raise SynthSpecError(
                    f"formant {f} Hz outside (0, {sample_rate / 2}) at fs={sample_rate}"
                )
            if bw <= 0:
                raise SynthSpecError(f"bandwidth must be > 0, got {bw}")


def load_synth_spec(path) -> list[SynthSegment]:
    """Parse the JSON segment list for the synth command."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SynthSpecError(f"{path}: {exc}") from exc
    if not isinstance(data, list) or not data:
        raise SynthSpecError(f"{path}: expected a non-empty JSON list of segments")
    segments = []
    for entry in data:
        try:
            segments.append(SynthSegment(
                float(entry["duration_s"]),
                float(entry["f0_hz"]),
                [(float(f), float(b)) for f, b in entry["formants"]],
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise SynthSpecError(f"{path}: bad segment {entry!r} ({exc})") from exc
    return segments


def formant_filter(formants, sample_rate: int = SYNTH_RATE) -> np.ndarray:
    """All-pole denominator with one conjugate pole pair per formant."""
    a = np.array([1.0])
    for f, bw in formants:
        radius = np.exp(-np.pi * bw / sample_rate)
        theta = 2.0 * np.pi * f / sample_rate
        a = np.convolve(a, [1.0, -2.0 * radius * np.cos(theta), radius * radius])
    return a


def impulse_train(n_samples: int, f0_hz: float, sample_rate: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit impulses at multiples of the period; returns (excitation, instants)."""
    period = sample_rate / f0_hz
    instants = np.round(np.arange(0, n_samples, period)).astype(np.int64)
    instants = instants[instants < n_samples]
    exc = np.zeros(n_samples)
    exc[instants] = 1.0
    return exc, instants


def synthesize_segment(
    segment: SynthSegment, sample_rate: int, rng: np.random.Generator
) -> np.ndarray:
    segment.validate(sample_rate)
    n = int(round(segment.duration_s * sample_rate))
    if segment.f0_hz > 0:
        exc, _ = impulse_train(n, segment.f0_hz, sample_rate)
    else:
        exc = rng.standard_normal(n)
    return lfilter([1.0], formant_filter(segment.formants, sample_rate), exc)


def synthesize(
    segments: list[SynthSegment],
    sample_rate: int = SYNTH_RATE,
    seed: int = 0,
) -> tuple[Signal, np.ndarray]:
    """Render segments with 10 ms crossfades; returns (signal, per-sample segment id)."""
    if not segments:
        raise SynthSpecError("no segments to synthesize")
    rng = np.random.default_rng(seed)
    fade = int(round(CROSSFADE_S * sample_rate))
    rendered = [synthesize_segment(s, sample_rate, rng) for s in segments]
    for seg, wave in zip(segments, rendered):
        if len(wave) <= fade and len(rendered) > 1:
            raise SynthSpecError(
                f"segment of {seg.duration_s}s is shorter than the crossfade"
            )

    total = sum(len(w) for w in rendered) - fade * (len(rendered) - 1)
    out = np.zeros(total)
    owner = np.zeros(total, dtype=np.int64)
    ramp = np.linspace(0.0, 1.0, fade, endpoint=False) if fade else np.zeros(0)
    pos = 0
    for i, wave in enumerate(rendered):
        w = wave.copy()
        if i > 0 and fade:
            w[:fade] *= ramp
        if i < len(rendered) - 1 and fade:
            w[len(w) - fade:] *= (1.0 - ramp)
        out[pos:pos + len(w)] += w
        mid = pos + (fade // 2 if i > 0 else 0)
        owner[mid:pos + len(w)] = i
        pos += len(w) - (fade if i < len(rendered) - 1 else 0)
    peak = np.max(np.abs(out))
    if peak > 0:
        out *= PEAK_LEVEL / peak
    return Signal(out, sample_rate), owner


def ground_truth_rows(
    segments: list[SynthSegment],
    owner: np.ndarray,
    sample_rate: int,
    frame_ms: float = 25.0,
    hop_ms: float = 10.0,
) -> np.ndarray:
    """Reference F1..F3 per analysis frame, read from the segment at the frame center."""
    flen = int(round(frame_ms * sample_rate / 1000.0))
    hop = int(round(hop_ms * sample_rate / 1000.0))
    n_frames = max((len(owner) - flen) // hop + 1, 0)
    rows = np.zeros((n_frames, 3))
    for i in range(n_frames):
        center = i * hop + flen // 2
        seg = segments[owner[min(center, len(owner) - 1)]]
        freqs = sorted(f for f, _ in seg.formants)[:3]
        rows[i, :len(freqs)] = freqs
    return rows
