"""Formant estimation and tracking toolkit.

Six all-pole estimators (plain, forward-backward, and quasi-closed-phase
weighted variants), a dynamic-programming formant tracker, an MLP tracker with
all-pole peak refinement, and an FDR/FEE evaluation harness.
"""

__version__ = "0.1.0"

from .allpole import (
    AllPoleModel,
    NormalEquationSystem,
    SingularSystemError,
    levinson_durbin,
    lp_autocorrelation,
    lp_covariance,
    lp_forward_backward_cov,
    qcp_variant,
    solve_spd_system,
)
from .dsp import (
    Frame,
    Signal,
    apply_window,
    autocorrelation,
    frame_signal,
    magnitude_spectrum,
    magnitude_spectrum_db,
    pre_emphasize,
)
from .glottal import (
    GciSequence,
    PitchTrack,
    QcpParams,
    WeightingFunction,
    build_qcp_weights,
    detect_gci,
    estimate_f0,
    unit_weights,
)
from .peaks import (
    CandidateLattice,
    PeakCandidate,
    allpole_spectrum_db,
    pick_peaks,
    select_candidates,
)
from .tracker import FormantTrack, TrackerConfig, enumerate_mappings, track_dp
