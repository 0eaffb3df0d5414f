"""Signal conditioning: pre-emphasis, framing, windowing, autocorrelation, spectra."""

from dataclasses import dataclass

import numpy as np

DEFAULT_SAMPLE_RATE = 8000
DEFAULT_FRAME_MS = 25.0
DEFAULT_HOP_MS = 10.0
DEFAULT_PREEMPHASIS = 0.5
DB_FLOOR_EPS = 1e-12

HAMMING = "hamming"
RECTANGULAR = "rectangular"


@dataclass
class Signal:
    """Mono audio samples in [-1, 1] at a fixed sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("signal contains non-finite samples")

    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass
class Frame:
    """One analysis segment; start_index is the offset into the source signal."""

    samples: np.ndarray
    start_index: int
    window_kind: str = RECTANGULAR

    def __len__(self) -> int:
        return len(self.samples)


def pre_emphasize(signal: Signal, alpha: float = DEFAULT_PREEMPHASIS) -> Signal:
    """First-order high-pass: out[n] = in[n] - alpha*in[n-1], out[0] = in[0]."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    x = signal.samples
    if x.size == 0:
        return Signal(x.copy(), signal.sample_rate)
    out = np.empty_like(x)
    out[0] = x[0]
    out[1:] = x[1:] - alpha * x[:-1]
    return Signal(out, signal.sample_rate)


def frame_length(sample_rate: int, frame_ms: float) -> int:
    return int(round(frame_ms * sample_rate / 1000.0))


def frame_signal(
    signal: Signal,
    frame_ms: float = DEFAULT_FRAME_MS,
    hop_ms: float = DEFAULT_HOP_MS,
) -> list[Frame]:
    """Slice into frames of frame_ms every hop_ms; a trailing partial frame is dropped."""
    if not frame_ms >= hop_ms > 0:
        raise ValueError(f"need frame_ms >= hop_ms > 0, got {frame_ms}/{hop_ms}")
    flen = frame_length(signal.sample_rate, frame_ms)
    hop = frame_length(signal.sample_rate, hop_ms)
    x = signal.samples
    frames = []
    start = 0
    while start + flen <= len(x):
        frames.append(Frame(x[start:start + flen].copy(), start))
        start += hop
    return frames


def apply_window(frame: Frame, kind: str) -> Frame:
    """Apply a Hamming window, or pass through unchanged for rectangular."""
    if kind == RECTANGULAR:
        return Frame(frame.samples.copy(), frame.start_index, RECTANGULAR)
    if kind == HAMMING:
        n = len(frame.samples)
        w = np.hamming(n) if n > 1 else np.ones(n)
        return Frame(frame.samples * w, frame.start_index, HAMMING)
    raise ValueError(f"unknown window kind: {kind!r}")


def autocorrelation(samples: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased autocorrelation r[k] = sum_n s[n]*s[n-k] for k = 0..max_lag."""
    x = np.asarray(samples, dtype=np.float64)
    if max_lag >= len(x):
        raise ValueError(f"max_lag {max_lag} must be < frame length {len(x)}")
    full = np.correlate(x, x, mode="full")
    mid = len(x) - 1
    return full[mid:mid + max_lag + 1]


def magnitude_spectrum(samples: np.ndarray, nfft: int) -> np.ndarray:
    """Linear magnitude of the one-sided DFT, nfft/2 + 1 bins."""
    x = np.asarray(samples, dtype=np.float64)
    if nfft < len(x) or nfft & (nfft - 1):
        raise ValueError(f"nfft must be a power of two >= sample count, got {nfft}")
    return np.abs(np.fft.rfft(x, nfft))


def magnitude_spectrum_db(samples: np.ndarray, nfft: int) -> np.ndarray:
    """One-sided magnitude spectrum in dB with a small floor so silence stays finite."""
    return 20.0 * np.log10(magnitude_spectrum(samples, nfft) + DB_FLOOR_EPS)
