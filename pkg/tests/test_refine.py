import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formantkit.peaks import PeakCandidate
from formantkit.refine import RefineConfig, refine_formants


def peaks_at(freqs):
    return [PeakCandidate(float(f), 0.0) for f in sorted(freqs)]


def test_exact_match_unchanged():
    pred = np.array([550.0, 1500.0, 2500.0])
    out = refine_formants(pred, peaks_at([550, 1500, 2500, 3400]))
    assert np.array_equal(out, pred)


def test_greedy_nearest_with_consumption():
    out = refine_formants(
        np.array([600.0, 1400.0, 2600.0]), peaks_at([550, 1500, 2500, 3400])
    )
    assert np.array_equal(out, [550.0, 1500.0, 2500.0])


def test_empty_peaks_keeps_predictions():
    pred = np.array([600.0, 1400.0, 2600.0])
    assert np.array_equal(refine_formants(pred, []), pred)


def test_fewer_peaks_than_formants():
    out = refine_formants(np.array([600.0, 1400.0, 2600.0]), peaks_at([580]))
    assert np.array_equal(out, [580.0, 1400.0, 2600.0])


def test_tie_goes_to_lower_frequency():
    out = refine_formants(np.array([1000.0]), peaks_at([900, 1100]))
    assert out[0] == 900.0


def test_rejects_descending_predictions():
    with pytest.raises(ValueError, match="ascending"):
        refine_formants(np.array([1500.0, 600.0, 2600.0]), [])


def test_distance_cap():
    out = refine_formants(
        np.array([600.0, 1400.0, 2600.0]), peaks_at([550]), max_distance_hz=20.0
    )
    assert np.array_equal(out, [600.0, 1400.0, 2600.0])


def test_config_validated():
    with pytest.raises(ValueError):
        RefineConfig(spectrum_method="LP-ACOR").validate()
    RefineConfig(spectrum_method="LP-FBCOV").validate()


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(100.0, 3900.0), min_size=3, max_size=3),
    st.lists(st.floats(100.0, 3900.0), min_size=0, max_size=6, unique=True),
)
def test_properties(pred_raw, peak_freqs):
    pred = np.sort(np.asarray(pred_raw))
    peaks = peaks_at(peak_freqs)
    out = refine_formants(pred, peaks)
    # ascending always
    assert np.all(np.diff(out) >= 0)
    # every output is a peak frequency or an original prediction
    allowed = set(p.frequency for p in peaks) | set(pred.tolist())
    assert all(v in allowed for v in out.tolist())
    # consumption: no peak appears twice unless it was also a prediction
    from collections import Counter

    counts = Counter(out.tolist())
    for value, count in counts.items():
        if count > 1:
            assert list(pred).count(value) >= count - 1
    # idempotence: refining the result again changes nothing
    again = refine_formants(out, peaks)
    assert np.array_equal(again, out)
