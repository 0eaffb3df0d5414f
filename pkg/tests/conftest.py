import numpy as np
import pytest
from scipy.signal import lfilter

from formantkit import Frame
from formantkit.synth import SynthSegment, formant_filter, impulse_train, synthesize

VOWEL_FORMANTS = [(700.0, 80.0), (1400.0, 90.0), (2600.0, 120.0)]


def ar2_signal(n=12000, seed=0, noise=1.0):
    """AR(2) process x_n = 1.5 x_{n-1} - 0.9 x_{n-2} + noise; a = [-1.5, 0.9]."""
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(n) * noise
    x = np.zeros(n)
    for i in range(2, n):
        x[i] = 1.5 * x[i - 1] - 0.9 * x[i - 2] + w[i]
    return x / np.max(np.abs(x))


def decay_frame(order12_formants=None, start=200, length=400):
    """Free decay of a single-impulse-excited all-pole filter (noiseless AR data)."""
    formants = order12_formants or [
        (400, 60), (900, 70), (1500, 80), (2200, 90), (2900, 110), (3500, 140)
    ]
    a = formant_filter(formants)
    exc = np.zeros(start + length + 100)
    exc[0] = 1.0
    x = lfilter([1.0], a, exc)
    return Frame(x[start:start + length], start), a


@pytest.fixture
def vowel_signal():
    """One-second 120 Hz synthetic vowel with known excitation instants."""
    seg = SynthSegment(1.0, 120.0, list(VOWEL_FORMANTS))
    sig, _ = synthesize([seg], seed=1)
    _, instants = impulse_train(len(sig.samples), 120.0, sig.sample_rate)
    return sig, instants


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
