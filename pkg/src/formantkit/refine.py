"""Snap MLP-predicted formants to the nearest all-pole spectral peaks."""

from dataclasses import dataclass

import numpy as np

from .peaks import PeakCandidate

REFINE_SPECTRA = ("LP-FBCOV", "QCP-FBCOV")
ASSIGNMENT_RULES = ("nearest-greedy-ascending",)


@dataclass
class RefineConfig:
    spectrum_method: str = "QCP-FBCOV"
    assignment: str = "nearest-greedy-ascending"
    max_distance_hz: float | None = None  # None disables the cap

    def validate(self):
        if self.spectrum_method not in REFINE_SPECTRA:
            raise ValueError(
                f"spectrum_method must be one of {REFINE_SPECTRA}, "
                f"got {self.spectrum_method!r}"
            )
        if self.assignment not in ASSIGNMENT_RULES:
            raise ValueError(
                f"assignment must be one of {ASSIGNMENT_RULES}, "
                f"got {self.assignment!r}"
            )


def refine_formants(
    predicted: np.ndarray,
    peaks: list[PeakCandidate],
    max_distance_hz: float | None = None,
) -> np.ndarray:
    """Replace each prediction with its nearest unconsumed peak frequency.

    Predictions are processed in ascending order and each peak is consumed at
    most once; ties go to the lower-frequency peak. A prediction with no
    remaining peak (or none within max_distance_hz, when set) is kept as-is.
    The result is re-sorted ascending.
    """
    pred = np.asarray(predicted, dtype=np.float64)
    if np.any(np.diff(pred) < 0):
        raise ValueError("predicted formants must be ascending")
    freqs = [p.frequency for p in peaks]
    taken = [False] * len(freqs)
    out = pred.copy()
    # exact matches claim their peaks before any far grab can consume them;
    # without this pass, re-refining an already refined frame could reassign
    pending = []
    for i, f in enumerate(pred):
        exact = next(
            (j for j, pf in enumerate(freqs) if not taken[j] and pf == f), None
        )
        if exact is None:
            pending.append(i)
        else:
            taken[exact] = True
    for i in pending:
        f = pred[i]
        best = None
        best_dist = np.inf
        for j, pf in enumerate(freqs):
            if not taken[j] and abs(pf - f) < best_dist:
                best = j
                best_dist = abs(pf - f)
        if best is None:
            continue
        if max_distance_hz is not None and best_dist > max_distance_hz:
            continue
        taken[best] = True
        out[i] = freqs[best]
    return np.sort(out)
