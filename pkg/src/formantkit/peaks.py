"""All-pole spectrum evaluation and formant-candidate extraction.

Candidates are the negative zero-crossings of the dB spectrum convolved with a
Gaussian derivative, refined by parabolic interpolation.
"""

from dataclasses import dataclass

import numpy as np

from .allpole import AllPoleModel

DEFAULT_NFFT = 1024
DEFAULT_GAUSS_WIDTH_HZ = 100.0
DEFAULT_MAX_CANDIDATES = 5
SPECTRUM_EPS = 1e-12


@dataclass
class PeakCandidate:
    frequency: float
    level_db: float


@dataclass
class CandidateLattice:
    frames: list[list[PeakCandidate]]
    frame_period: float  # seconds

    def __len__(self) -> int:
        return len(self.frames)


def allpole_spectrum_db(model: AllPoleModel, nfft: int = DEFAULT_NFFT) -> np.ndarray:
    """20*log10(gain/|A|) on nfft/2 + 1 uniformly spaced bins."""
    if nfft < 256 or nfft & (nfft - 1):
        raise ValueError(f"nfft must be a power of two >= 256, got {nfft}")
    denom = np.abs(np.fft.rfft(model.polynomial(), nfft))
    denom = np.maximum(denom, SPECTRUM_EPS)
    gain = max(model.gain, SPECTRUM_EPS)
    return 20.0 * np.log10(gain / denom)


def _gaussian_derivative_kernel(sigma_bins: float) -> np.ndarray:
    half = max(1, int(np.ceil(3.0 * sigma_bins)))
    t = np.arange(-half, half + 1, dtype=np.float64)
    return -t * np.exp(-t * t / (2.0 * sigma_bins * sigma_bins))


def smoothed_derivative(spectrum_db: np.ndarray, sigma_bins: float) -> np.ndarray:
    """Spectrum convolved with a Gaussian derivative (reflected-boundary padding)."""
    kern = _gaussian_derivative_kernel(sigma_bins)
    half = (len(kern) - 1) // 2
    padded = np.pad(spectrum_db, half, mode="reflect")
    # valid-mode convolution realizes out[n] = sum_t kernel(t) * s[n - t]
    return np.convolve(padded, kern, mode="valid")


def pick_peaks(
    spectrum_db: np.ndarray,
    sample_rate: int,
    gauss_width_hz: float = DEFAULT_GAUSS_WIDTH_HZ,
) -> list[PeakCandidate]:
    """Peaks of the smoothed spectrum with sub-bin parabolic refinement."""
    if gauss_width_hz <= 0.0:
        raise ValueError(f"gauss_width_hz must be > 0, got {gauss_width_hz}")
    s = np.asarray(spectrum_db, dtype=np.float64)
    nfft = 2 * (len(s) - 1)
    sigma_bins = gauss_width_hz * nfft / sample_rate
    d = smoothed_derivative(s, sigma_bins)
    bin_hz = sample_rate / nfft
    out = []
    seen = set()
    for b in range(len(d) - 1):
        if not (d[b] > 0.0 >= d[b + 1]):
            continue
        # the crossing locates the peak; smoothing skews the apex for
        # asymmetric peaks, so climb to the raw spectrum's local maximum
        # before fitting the parabola
        r = b if s[b] >= s[b + 1] else b + 1
        while r + 1 < len(s) and s[r + 1] > s[r]:
            r += 1
        while r - 1 >= 0 and s[r - 1] > s[r]:
            r -= 1
        if r in seen or r <= 0 or r >= len(s) - 1:
            continue
        seen.add(r)
        ym1, y0, yp1 = s[r - 1], s[r], s[r + 1]
        denom = ym1 - 2.0 * y0 + yp1
        if denom < 0.0:
            delta = float(np.clip(0.5 * (ym1 - yp1) / denom, -1.0, 1.0))
        else:
            delta = 0.0
        freq = (r + delta) * bin_hz
        level = y0 - 0.25 * (ym1 - yp1) * delta
        if 0.0 < freq < sample_rate / 2.0:
            out.append(PeakCandidate(freq, float(level)))
    return out


def select_candidates(
    peaks: list[PeakCandidate], k: int = DEFAULT_MAX_CANDIDATES
) -> list[PeakCandidate]:
    """Keep the k most energetic peaks, returned in ascending frequency order."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    strongest = sorted(peaks, key=lambda p: -p.level_db)[:k]
    return sorted(strongest, key=lambda p: p.frequency)
