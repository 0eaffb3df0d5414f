"""WAV input/output restricted to 16-bit PCM mono, with resampling to 8 kHz."""

import wave
from math import gcd

import numpy as np
from scipy.signal import upfirdn

from .dsp import DEFAULT_SAMPLE_RATE, Signal

PCM16_SCALE = 32768.0
RESAMPLE_TAPS_PER_PHASE = 32
RESAMPLE_KAISER_BETA = 8.0


class WavFormatError(Exception):
    """Raised for WAV files outside the supported RIFF/PCM-16/mono subset."""


def read_wav(path, target_rate: int = DEFAULT_SAMPLE_RATE) -> Signal:
    """Read a 16-bit PCM mono WAV and resample to target_rate if needed."""
    try:
        with wave.open(str(path), "rb") as wf:
            n_channels = wf.getnchannels()
            sampwidth = wf.getsampwidth()
            rate = wf.getframerate()
            n_frames = wf.getnframes()
            raw = wf.readframes(n_frames)
    except (wave.Error, EOFError) as exc:
        raise WavFormatError(f"not a readable RIFF/WAVE file: {path} ({exc})") from exc
    if n_channels != 1:
        raise WavFormatError(
            f"mono input required, {path} has {n_channels} channels"
        )
    if sampwidth != 2:
        raise WavFormatError(
            f"16-bit PCM required, {path} has {8 * sampwidth}-bit samples"
        )
    pcm = np.frombuffer(raw, dtype="<i2")
    samples = pcm.astype(np.float64) / PCM16_SCALE
    sig = Signal(samples, rate)
    if rate != target_rate:
        sig = resample(sig, target_rate)
    return sig


def write_wav(path, signal: Signal) -> None:
    """Write a Signal as 16-bit PCM mono; samples are clipped to [-1, 1)."""
    clipped = np.clip(signal.samples, -1.0, 32767.0 / PCM16_SCALE)
    pcm = np.round(clipped * PCM16_SCALE).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(signal.sample_rate)
        wf.writeframes(pcm.tobytes())


def _design_lowpass(up: int, down: int) -> np.ndarray:
    # Windowed sinc, odd length so the group delay is an integer number of
    # upsampled samples; 32 taps per polyphase branch.
    n_taps = RESAMPLE_TAPS_PER_PHASE * up + 1
    cutoff = 1.0 / max(up, down)  # in Nyquist units of the upsampled rate
    t = np.arange(n_taps) - (n_taps - 1) / 2.0
    h = cutoff * np.sinc(cutoff * t) * np.kaiser(n_taps, RESAMPLE_KAISER_BETA)
    return up * h / np.sum(h)


def resample(signal: Signal, target_rate: int) -> Signal:
    """Polyphase windowed-sinc resampling (Kaiser window)."""
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if signal.sample_rate == target_rate:
        return Signal(signal.samples.copy(), target_rate)
    g = gcd(signal.sample_rate, target_rate)
    up = target_rate // g
    down = signal.sample_rate // g
    h = _design_lowpass(up, down)
    y = upfirdn(h, signal.samples, up=up, down=down)
    delay = (len(h) - 1) // 2
    start = delay // down
    n_out = int(np.ceil(len(signal.samples) * up / down))
    y = y[start:start + n_out]
    if len(y) < n_out:
        y = np.pad(y, (0, n_out - len(y)))
    return Signal(np.clip(y, -1.0, 1.0), target_rate)
