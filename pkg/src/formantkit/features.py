"""RASTA-PLP cepstral features and context stacking for the neural tracker."""

import struct
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter, lfilter_zi

from .allpole import levinson_durbin
from .dsp import Frame

PLP_NFFT = 256
PLP_ORDER = 12
N_CEPSTRA = 13
N_BARK_BANDS = 15
BAND_ENERGY_FLOOR = 1e-10
CONTEXT_RADIUS = 5

# bandpass over the band trajectories: 0.1*(2 + z^-1 - z^-3 - 2 z^-4) / (1 - 0.98 z^-1)
RASTA_NUM = np.array([0.2, 0.1, 0.0, -0.1, -0.2])
RASTA_DEN = np.array([1.0, -0.98])

FEATURE_MAGIC = b"FPLP"


class FeatureFormatError(Exception):
    """Raised for malformed feature cache files."""


def hz_to_bark(f):
    return 6.0 * np.arcsinh(np.asarray(f, dtype=np.float64) / 600.0)


def bark_filterbank(nfft: int, sample_rate: int, n_bands: int) -> np.ndarray:
    """Trapezoidal (in log magnitude) critical-band filters, ~1 Bark apart."""
    n_bins = nfft // 2 + 1
    bin_bark = hz_to_bark(np.arange(n_bins) * sample_rate / nfft)
    nyq_bark = hz_to_bark(sample_rate / 2.0)
    step = nyq_bark / (n_bands - 1)
    wts = np.zeros((n_bands, n_bins))
    for i in range(n_bands):
        center = i * step
        lof = bin_bark - center - 0.5
        hif = bin_bark - center + 0.5
        wts[i] = 10.0 ** np.minimum(0.0, np.minimum(hif, -2.5 * lof))
    return wts


def equal_loudness(center_hz: np.ndarray) -> np.ndarray:
    fsq = np.asarray(center_hz, dtype=np.float64) ** 2
    return (fsq / (fsq + 1.6e5)) ** 2 * (fsq + 1.44e6) / (fsq + 9.61e6)


def _band_centers_hz(sample_rate: int, n_bands: int) -> np.ndarray:
    nyq_bark = hz_to_bark(sample_rate / 2.0)
    barks = np.arange(n_bands) * nyq_bark / (n_bands - 1)
    return 600.0 * np.sinh(barks / 6.0)


def lpc_to_cepstrum(a: np.ndarray, error: float, n_out: int) -> np.ndarray:
    """Cepstrum of the gain-matched all-pole model; c0 = log(prediction error)."""
    c = np.zeros(n_out)
    c[0] = np.log(max(error, BAND_ENERGY_FLOOR))
    p = len(a)
    for n in range(1, n_out):
        acc = a[n - 1] if n <= p else 0.0
        for m in range(1, n):
            if n - m <= p:
                acc += (m / n) * c[m] * a[n - m - 1]
        c[n] = -acc
    return c


@dataclass
class RastaPlpConfig:
    nfft: int = PLP_NFFT
    order: int = PLP_ORDER
    n_cepstra: int = N_CEPSTRA
    n_bands: int = N_BARK_BANDS
    rasta: bool = True


def rasta_plp(
    frames: list[Frame],
    sample_rate: int = 8000,
    config: RastaPlpConfig | None = None,
) -> np.ndarray:
    """Cepstral features, one row per frame.

    Per frame: Hamming-windowed power spectrum, critical-band integration, log,
    RASTA bandpass filtering along time per band, exp, equal-loudness weighting,
    cube-root compression, then an autocorrelation-domain all-pole fit converted
    to cepstra. The RASTA filter starts from its steady state for the first
    frame's band values, so constant inputs produce zero band trajectories from
    the first frame on.
    """
    cfg = config or RastaPlpConfig()
    if cfg.order >= cfg.n_bands:
        raise ValueError("all-pole order must be below the band count")
    if not frames:
        return np.zeros((0, cfg.n_cepstra))
    window = np.hamming(len(frames[0]))
    stacked = np.stack([f.samples for f in frames])
    spectra = np.abs(np.fft.rfft(stacked * window, cfg.nfft, axis=1)) ** 2

    fb = bark_filterbank(cfg.nfft, sample_rate, cfg.n_bands)
    bands = spectra @ fb.T
    bands = np.maximum(bands, BAND_ENERGY_FLOOR)

    if cfg.rasta:
        logs = np.log(bands)
        zi = lfilter_zi(RASTA_NUM, RASTA_DEN)[:, None] * logs[0][None, :]
        filtered, _ = lfilter(RASTA_NUM, RASTA_DEN, logs, axis=0, zi=zi)
        bands = np.exp(filtered)

    eql = equal_loudness(_band_centers_hz(sample_rate, cfg.n_bands))
    compressed = (bands * eql) ** (1.0 / 3.0)
    # edge bands are unreliable after the filterbank; copy their neighbors
    compressed[:, 0] = compressed[:, 1]
    compressed[:, -1] = compressed[:, -2]

    out = np.empty((len(frames), cfg.n_cepstra))
    for i, spec in enumerate(compressed):
        sym = np.concatenate([spec, spec[-2:0:-1]])
        r = np.real(np.fft.ifft(sym))[:cfg.n_bands]
        r[0] = max(r[0], BAND_ENERGY_FLOOR)
        a, err = levinson_durbin(r, cfg.order)
        out[i] = lpc_to_cepstrum(a, err, cfg.n_cepstra)
    return out


def stack_context(features: np.ndarray, radius: int = CONTEXT_RADIUS) -> np.ndarray:
    """Concatenate each frame with its +-radius neighbors; edges clamp-replicate."""
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 2 or len(feats) == 0:
        raise ValueError("features must be a non-empty 2-D array")
    n = len(feats)
    idx = np.arange(n)[:, None] + np.arange(-radius, radius + 1)[None, :]
    idx = np.clip(idx, 0, n - 1)
    return feats[idx].reshape(n, -1)


def save_features(path, features: np.ndarray) -> None:
    """Cache features as FPLP: magic, u32 count, u32 dim, row-major float32."""
    feats = np.ascontiguousarray(features, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sII", FEATURE_MAGIC, feats.shape[0], feats.shape[1]))
        fh.write(feats.tobytes())


def load_features(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(12)
        if len(header) < 12:
            raise FeatureFormatError("truncated feature file header")
        magic, count, dim = struct.unpack("<4sII", header)
        if magic != FEATURE_MAGIC:
            raise FeatureFormatError(f"bad magic {magic!r}")
        payload = fh.read(4 * count * dim)
        if len(payload) != 4 * count * dim:
            raise FeatureFormatError("truncated feature payload")
    return np.frombuffer(payload, dtype="<f4").reshape(count, dim).astype(np.float64)
