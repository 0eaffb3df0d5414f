"""Dynamic-programming assignment of spectral peak candidates to four contours."""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .peaks import CandidateLattice

DEFAULT_NOMINAL_HZ = (500.0, 1500.0, 2500.0, 3500.0)
DEFAULT_STATIONARY_WEIGHT = 1.0
DEFAULT_TRANSITION_WEIGHT = 4.0
DEFAULT_MISSING_PENALTY = 1.5
N_SLOTS = 4


@dataclass
class TrackerConfig:
    nominal_hz: tuple = DEFAULT_NOMINAL_HZ
    stationary_weight: float = DEFAULT_STATIONARY_WEIGHT
    transition_weight: float = DEFAULT_TRANSITION_WEIGHT
    missing_penalty: float = DEFAULT_MISSING_PENALTY

    def validate(self):
        if list(self.nominal_hz) != sorted(self.nominal_hz):
            raise ValueError("nominal frequencies must be ascending")
        if min(self.stationary_weight, self.transition_weight, self.missing_penalty) < 0:
            raise ValueError("tracker weights must be >= 0")


@dataclass
class FormantTrack:
    frequencies: np.ndarray  # (n_frames, n_slots), 0 marks an unassigned slot
    frame_period: float      # seconds

    def __len__(self) -> int:
        return len(self.frequencies)


def enumerate_mappings(n_candidates: int, n_slots: int = N_SLOTS) -> list[tuple]:
    """All order-preserving injective partial assignments of candidates to slots.

    Each mapping is a tuple of length n_slots holding a candidate index or None.
    Choosing m candidates and m slots keeps both in ascending order, so the
    count is sum_m C(n_candidates, m) * C(n_slots, m).
    """
    if n_candidates < 0 or n_candidates > 10:
        raise ValueError(f"candidate count out of range: {n_candidates}")
    mappings = []
    for m in range(min(n_candidates, n_slots) + 1):
        for cand_set in combinations(range(n_candidates), m):
            for slot_set in combinations(range(n_slots), m):
                mapping = [None] * n_slots
                for c, s in zip(cand_set, slot_set):
                    mapping[s] = c
                mappings.append(tuple(mapping))
    return mappings


def _stationary_cost(freqs: np.ndarray, mapping: tuple, cfg: TrackerConfig) -> float:
    cost = 0.0
    for slot, cand in enumerate(mapping):
        if cand is None:
            cost += cfg.missing_penalty
        else:
            nominal = cfg.nominal_hz[slot]
            cost += cfg.stationary_weight * abs(freqs[cand] - nominal) / nominal
    return cost


def _transition_cost(
    prev_freqs: np.ndarray, prev_map: tuple, freqs: np.ndarray, mapping: tuple,
    cfg: TrackerConfig,
) -> float:
    cost = 0.0
    for slot in range(len(mapping)):
        a, b = prev_map[slot], mapping[slot]
        if a is None or b is None:
            continue
        cost += cfg.transition_weight * abs(np.log(freqs[b] / prev_freqs[a]))
    return cost


def _mapping_freq_table(freqs: np.ndarray, mappings: list[tuple]) -> np.ndarray:
    """(n_mappings, n_slots) assigned frequencies with NaN for empty slots."""
    table = np.full((len(mappings), len(mappings[0])), np.nan)
    for j, mapping in enumerate(mappings):
        for slot, cand in enumerate(mapping):
            if cand is not None:
                table[j, slot] = freqs[cand]
    return table


def _stationary_vector(table: np.ndarray, cfg: TrackerConfig) -> np.ndarray:
    nominal = np.asarray(cfg.nominal_hz)
    deviation = np.abs(table - nominal) / nominal
    assigned = ~np.isnan(table)
    return (cfg.stationary_weight * np.nansum(deviation, axis=1)
            + cfg.missing_penalty * (table.shape[1] - assigned.sum(axis=1)))


def track_dp(lattice: CandidateLattice, config: TrackerConfig | None = None) -> FormantTrack:
    """Viterbi over per-frame candidate-to-slot mappings, minimizing total cost.

    Ties are broken toward the earlier mapping index at every frame.
    """
    cfg = config or TrackerConfig()
    cfg.validate()
    if len(lattice) == 0:
        raise ValueError("empty candidate lattice")
    frame_freqs = [np.array([p.frequency for p in f]) for f in lattice.frames]
    frame_maps = [enumerate_mappings(len(f)) for f in frame_freqs]
    tables = [
        _mapping_freq_table(f, m) for f, m in zip(frame_freqs, frame_maps)
    ]
    log_tables = [np.log(t) for t in tables]

    costs = _stationary_vector(tables[0], cfg)
    backptr = []
    for t in range(1, len(frame_freqs)):
        # transition[i, j]: slots assigned in both mappings contribute
        # |log f_t / f_{t-1}|; NaN pairs (an empty slot on either side) are 0
        diff = np.abs(log_tables[t][None, :, :] - log_tables[t - 1][:, None, :])
        trans = cfg.transition_weight * np.nansum(diff, axis=2)
        total = costs[:, None] + trans
        back = np.argmin(total, axis=0)
        costs = total[back, np.arange(total.shape[1])] + _stationary_vector(tables[t], cfg)
        backptr.append(back)

    best = int(np.argmin(costs))
    path = [best]
    for back in reversed(backptr):
        path.append(int(back[path[-1]]))
    path.reverse()

    n_slots = len(cfg.nominal_hz)
    freqs = np.zeros((len(frame_freqs), n_slots))
    for t, state in enumerate(path):
        for slot, cand in enumerate(frame_maps[t][state]):
            if cand is not None:
                freqs[t, slot] = frame_freqs[t][cand]
    return FormantTrack(freqs, lattice.frame_period)
