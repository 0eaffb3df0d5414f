"""F0 estimation, glottal closure instant detection, and AME temporal weights."""

from dataclasses import dataclass

import numpy as np
import scipy.signal

from . import allpole
from .dsp import DEFAULT_FRAME_MS, DEFAULT_HOP_MS, HAMMING, Frame, Signal, apply_window, frame_signal

F0_MIN_HZ = 60.0
F0_MAX_HZ = 400.0
VOICING_CORR_THRESHOLD = 0.3
VOICING_RMS_THRESHOLD = 1e-4
GCI_SEARCH_TOLERANCE = 0.2  # fraction of the local period

DEFAULT_DQ = 0.7
DEFAULT_PQ = 0.05
DEFAULT_RAMP = 7
DEFAULT_DFLOOR = 1e-5


@dataclass
class QcpParams:
    dq: float = DEFAULT_DQ
    pq: float = DEFAULT_PQ
    ramp_samples: int = DEFAULT_RAMP
    d_floor: float = DEFAULT_DFLOOR

    def validate(self):
        if not 0.0 < self.dq <= 1.0:
            raise ValueError(f"dq must be in (0, 1], got {self.dq}")
        if not 0.0 <= self.pq < 1.0:
            raise ValueError(f"pq must be in [0, 1), got {self.pq}")
        if self.ramp_samples < 0:
            raise ValueError(f"ramp_samples must be >= 0, got {self.ramp_samples}")
        if self.d_floor <= 0.0:
            raise ValueError(f"d_floor must be > 0, got {self.d_floor}")


@dataclass
class PitchTrack:
    f0: np.ndarray       # Hz per frame, 0 when unvoiced
    voiced: np.ndarray   # bool per frame
    hop_samples: int
    frame_samples: int


@dataclass
class GciSequence:
    instants: np.ndarray  # strictly increasing sample indices

    def __len__(self) -> int:
        return len(self.instants)


@dataclass
class WeightingFunction:
    weights: np.ndarray
    params: QcpParams


def unit_weights(n: int) -> WeightingFunction:
    """All-ones weights; makes every weighted method match its plain counterpart."""
    return WeightingFunction(np.ones(n), QcpParams(d_floor=1.0))


def estimate_f0(
    signal: Signal,
    frame_ms: float = DEFAULT_FRAME_MS,
    hop_ms: float = DEFAULT_HOP_MS,
) -> PitchTrack:
    """Normalized-autocorrelation pitch per frame over the 60..400 Hz lag range."""
    sr = signal.sample_rate
    lag_lo = int(sr / F0_MAX_HZ)
    lag_hi = int(sr / F0_MIN_HZ)
    frames = frame_signal(signal, frame_ms, hop_ms)
    hop = int(round(hop_ms * sr / 1000.0))
    flen = int(round(frame_ms * sr / 1000.0))
    if lag_hi >= flen:
        raise ValueError("frame too short for the pitch lag range")
    f0 = np.zeros(len(frames))
    voiced = np.zeros(len(frames), dtype=bool)
    for i, frame in enumerate(frames):
        x = frame.samples
        rms = np.sqrt(np.mean(x * x))
        if rms <= VOICING_RMS_THRESHOLD:
            continue
        full = np.correlate(x, x, mode="full")
        r = full[len(x) - 1:]
        if r[0] <= 0.0:
            continue
        norm = r[lag_lo:lag_hi + 1] / r[0]
        k = int(np.argmax(norm))
        if norm[k] <= VOICING_CORR_THRESHOLD:
            continue
        lag = float(lag_lo + k)
        # parabolic refinement of the autocorrelation peak
        j = lag_lo + k
        if 0 < j < len(r) - 1:
            denom = r[j - 1] - 2.0 * r[j] + r[j + 1]
            if denom < 0.0:
                lag += 0.5 * (r[j - 1] - r[j + 1]) / denom
        lag = min(max(lag, float(lag_lo)), float(lag_hi))
        voiced[i] = True
        f0[i] = min(max(sr / lag, F0_MIN_HZ), F0_MAX_HZ)
    return PitchTrack(f0, voiced, hop, flen)


def _lp_residual(signal: Signal, span_start: int, span_end: int, order: int) -> np.ndarray:
    """Inverse-filter a span with frame-local LP models; returns |residual| per sample."""
    sr = signal.sample_rate
    x = signal.samples
    flen = int(round(DEFAULT_FRAME_MS * sr / 1000.0))
    hop = int(round(DEFAULT_HOP_MS * sr / 1000.0))
    res = np.zeros(span_end - span_start)
    pos = span_start
    while pos < span_end:
        f_start = max(min(pos, len(x) - flen), 0)
        frame = Frame(x[f_start:f_start + flen], f_start)
        model = allpole.lp_autocorrelation(apply_window(frame, HAMMING), order)
        poly = model.polynomial()
        chunk_end = min(pos + hop, span_end)
        ctx = max(0, pos - order)
        e = scipy.signal.lfilter(poly, [1.0], x[ctx:chunk_end])
        res[pos - span_start:chunk_end - span_start] = e[pos - ctx:]
        pos = chunk_end
    return np.abs(res)


def _voiced_regions(pitch: PitchTrack, n_samples: int) -> list[tuple[int, int]]:
    regions = []
    start = None
    for i, v in enumerate(pitch.voiced):
        if v and start is None:
            start = i
        elif not v and start is not None:
            regions.append((start, i - 1))
            start = None
    if start is not None:
        regions.append((start, len(pitch.voiced) - 1))
    spans = []
    for lo, hi in regions:
        s = lo * pitch.hop_samples
        e = min(hi * pitch.hop_samples + pitch.frame_samples, n_samples)
        spans.append((s, e, lo, hi))
    return spans


def detect_gci(
    signal: Signal,
    pitch: PitchTrack,
    order: int = allpole.DEFAULT_ORDER,
) -> GciSequence:
    """One LP-residual peak per pitch period inside each voiced region."""
    sr = signal.sample_rate
    instants = []
    for s, e, f_lo, f_hi in _voiced_regions(pitch, len(signal.samples)):
        if e - s < 2:
            continue
        res = _lp_residual(signal, s, e, order)

        def period_at(n: int) -> float:
            idx = min(max((n - pitch.frame_samples // 2) // pitch.hop_samples, f_lo), f_hi)
            f0 = pitch.f0[idx]
            return sr / f0 if f0 > 0 else sr / F0_MIN_HZ

        t0 = period_at(s)
        first_end = min(int(round((1.0 + GCI_SEARCH_TOLERANCE) * t0)), len(res))
        if first_end < 1:
            continue
        g = int(np.argmax(res[:first_end]))
        instants.append(s + g)
        while True:
            t = period_at(instants[-1])
            lo = instants[-1] - s + int(round((1.0 - GCI_SEARCH_TOLERANCE) * t))
            hi = instants[-1] - s + int(round((1.0 + GCI_SEARCH_TOLERANCE) * t)) + 1
            if lo >= len(res):
                break
            hi = min(hi, len(res))
            if hi <= lo:
                break
            g = lo + int(np.argmax(res[lo:hi]))
            instants.append(s + g)
    return GciSequence(np.asarray(instants, dtype=np.int64))


def _cycle_bounds(sample_rate: int) -> tuple[float, float]:
    # A GCI pair forms a cycle only if its spacing is pitch-plausible; the slack
    # matches the detector's own search tolerance.
    return (
        (1.0 - GCI_SEARCH_TOLERANCE) * sample_rate / F0_MAX_HZ,
        (1.0 + GCI_SEARCH_TOLERANCE) * sample_rate / F0_MIN_HZ,
    )


def build_qcp_weights(
    start_index: int,
    length: int,
    gcis: GciSequence,
    params: QcpParams,
    sample_rate: int = 8000,
) -> WeightingFunction:
    """AME weights for the span [start_index, start_index + length).

    Within each glottal cycle [g_i, g_{i+1}) the weight is 1 on the quasi-closed
    span of length dq*T beginning pq*T after the closure instant, and d_floor on
    the rest of the cycle (open phase and the excitation region). Linear ramps of
    ramp_samples sit just inside the unity span so the attenuated regions keep
    the full floor value. Samples not covered by any cycle get weight 1.
    """
    params.validate()
    w = np.ones(length)
    g = np.asarray(gcis.instants, dtype=np.int64)
    if len(g) < 2 or params.d_floor >= 1.0:
        return WeightingFunction(w, params)
    t_min, t_max = _cycle_bounds(sample_rate)
    span_end = start_index + length
    cycles = [
        (int(g0), int(g1), float(g1 - g0))
        for g0, g1 in zip(g[:-1], g[1:])
        if t_min <= g1 - g0 <= t_max
    ]
    starts = {g0 for g0, _, _ in cycles}
    for g0, g1, t in cycles:
        _paint_cycle(w, start_index, span_end, g0, g1, t, params)
    for _, g1, t in cycles:
        if g1 in starts:
            continue
        # the excitation at a region-final closure instant has no following
        # cycle to attenuate it; give it the head notch the next one would paint
        lo = max(g1, start_index)
        hi = min(g1 + max(int(round(params.pq * t)), 1), span_end)
        if lo < hi:
            w[lo - start_index:hi - start_index] = np.minimum(
                w[lo - start_index:hi - start_index], params.d_floor
            )
    return WeightingFunction(w, params)


def _paint_cycle(
    w: np.ndarray,
    start_index: int,
    span_end: int,
    g0: int,
    g1: int,
    t: float,
    params: QcpParams,
) -> None:
    s0 = g0 + int(round(params.pq * t))
    s1 = s0 + int(round(params.dq * t))
    s1 = min(s1, g1)
    lo = max(g0, start_index)
    hi = min(g1, span_end)
    if lo >= hi:
        return
    n = np.arange(lo, hi)
    vals = np.full(len(n), params.d_floor)
    inside = (n >= s0) & (n < s1)
    if params.ramp_samples > 0:
        rise = (n[inside] - s0 + 1) / (params.ramp_samples + 1)
        fall = (s1 - n[inside]) / (params.ramp_samples + 1)
        frac = np.minimum(1.0, np.minimum(rise, fall))
        vals[inside] = params.d_floor + (1.0 - params.d_floor) * frac
    else:
        vals[inside] = 1.0
    sl = slice(lo - start_index, hi - start_index)
    w[sl] = np.minimum(w[sl], vals)
