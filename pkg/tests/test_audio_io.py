import wave

import numpy as np
import pytest

from formantkit import Signal
from formantkit.audio_io import WavFormatError, read_wav, resample, write_wav


def write_pcm(path, samples, rate, channels=1, sampwidth=2):
    pcm = np.round(np.asarray(samples) * 32768.0).astype("<i2")
    if sampwidth == 1:
        pcm = (pcm // 256 + 128).astype(np.uint8)
    data = np.repeat(pcm, channels)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(channels)
        wf.setsampwidth(sampwidth)
        wf.setframerate(rate)
        wf.writeframes(data.tobytes())


def test_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    x = rng.uniform(-0.5, 0.5, 1600)
    path = tmp_path / "a.wav"
    write_wav(path, Signal(x, 8000))
    sig = read_wav(path)
    assert sig.sample_rate == 8000
    assert np.max(np.abs(sig.samples - x)) < 1.0 / 32768.0


def test_stereo_rejected_names_channel_count(tmp_path):
    path = tmp_path / "st.wav"
    write_pcm(path, np.zeros(100), 8000, channels=2)
    with pytest.raises(WavFormatError, match="2 channels"):
        read_wav(path)


def test_eight_bit_rejected(tmp_path):
    path = tmp_path / "b8.wav"
    write_pcm(path, np.zeros(100), 8000, sampwidth=1)
    with pytest.raises(WavFormatError, match="8-bit"):
        read_wav(path)


def test_garbage_file_rejected(tmp_path):
    path = tmp_path / "junk.wav"
    path.write_bytes(b"not a wave file at all")
    with pytest.raises(WavFormatError):
        read_wav(path)


def test_resample_16k_to_8k(tmp_path):
    rate_in = 16000
    n = rate_in  # one second
    t = np.arange(n) / rate_in
    x = 0.4 * np.sin(2 * np.pi * 440.0 * t)
    path = tmp_path / "s16k.wav"
    write_pcm(path, x, rate_in)
    sig = read_wav(path)
    assert sig.sample_rate == 8000
    assert len(sig.samples) == 8000
    spec = np.abs(np.fft.rfft(sig.samples * np.hanning(len(sig.samples))))
    peak_hz = np.argmax(spec) * 8000 / len(sig.samples)
    assert abs(peak_hz - 440.0) < 2.0
    # amplitude preserved through the polyphase filter
    rms_in = 0.4 / np.sqrt(2)
    rms_out = np.sqrt(np.mean(sig.samples[400:-400] ** 2))
    assert abs(rms_out - rms_in) / rms_in < 0.05


def test_resample_identity():
    x = np.linspace(-0.5, 0.5, 1000)
    out = resample(Signal(x, 8000), 8000)
    assert np.array_equal(out.samples, x)


def test_resample_output_length():
    sig = Signal(np.zeros(44100), 44100)
    out = resample(sig, 8000)
    assert len(out.samples) == int(np.ceil(44100 * 8000 / 44100))
