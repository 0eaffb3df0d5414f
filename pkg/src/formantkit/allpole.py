"""All-pole estimators: plain, forward-backward, and temporally weighted variants.

All six methods share the predictor convention A(z) = 1 + sum_k a_k z^-k, so the
model predicts x_n ~ -sum_k a_k x_{n-k} and resonances appear as minima of |A|.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dsp import Frame

DEFAULT_ORDER = 12
RIDGE_FACTOR = 1e-9
SOLVE_RESIDUAL_TOL = 1e-6

METHOD_LP_ACOR = "LP-ACOR"
METHOD_LP_COV = "LP-COV"
METHOD_LP_FBCOV = "LP-FBCOV"
METHOD_QCP_ACOR = "QCP-ACOR"
METHOD_QCP_COV = "QCP-COV"
METHOD_QCP_FBCOV = "QCP-FBCOV"

QCP_MODES = ("acor", "cov", "fbcov")


class SingularSystemError(Exception):
    """Normal equations stayed singular after ridge regularization."""


@dataclass
class AllPoleModel:
    order: int
    coefficients: np.ndarray  # a_1..a_p
    gain: float
    method_tag: str
    degenerate: bool = False
    unstable: bool = False

    def polynomial(self) -> np.ndarray:
        """Full denominator [1, a_1, ..., a_p]."""
        return np.concatenate(([1.0], self.coefficients))

    def pole_moduli(self) -> np.ndarray:
        return np.abs(np.roots(self.polynomial()))


@dataclass
class NormalEquationSystem:
    matrix: np.ndarray
    rhs: np.ndarray


def _degenerate_model(p: int, tag: str) -> AllPoleModel:
    return AllPoleModel(p, np.zeros(p), 0.0, tag, degenerate=True)


def levinson_durbin(r: np.ndarray, p: int) -> tuple[np.ndarray, float]:
    """Solve the Toeplitz normal equations; returns (a_1..a_p, final error)."""
    a = np.zeros(p)
    err = r[0]
    for i in range(1, p + 1):
        if not np.isfinite(err) or err <= 0.0:
            raise SingularSystemError(
                f"prediction error collapsed at recursion step {i}"
            )
        acc = r[i] + np.dot(a[:i - 1], r[i - 1:0:-1])
        k = -acc / err
        a[:i - 1] = a[:i - 1] + k * a[:i - 1][::-1]
        a[i - 1] = k
        err *= 1.0 - k * k
    if not np.isfinite(err) or err < 0.0:
        raise SingularSystemError("prediction error collapsed at the final step")
    return a, err


def solve_spd_system(system: NormalEquationSystem) -> np.ndarray:
    """Cholesky solve with one ridge-regularized retry on failure."""
    m = np.asarray(system.matrix, dtype=np.float64)
    b = np.asarray(system.rhs, dtype=np.float64)
    p = m.shape[0]
    sol = None
    try:
        c, low = scipy.linalg.cho_factor(m, check_finite=False)
        sol = scipy.linalg.cho_solve((c, low), b, check_finite=False)
    except scipy.linalg.LinAlgError:
        lam = RIDGE_FACTOR * np.trace(m) / p
        if lam <= 0.0:
            raise SingularSystemError("matrix is not positive definite")
        try:
            c, low = scipy.linalg.cho_factor(
                m + lam * np.eye(p), check_finite=False
            )
            sol = scipy.linalg.cho_solve((c, low), b, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise SingularSystemError(
                "matrix stayed non-positive-definite after ridge retry"
            ) from exc
    residual = np.linalg.norm(m @ sol - b)
    scale = np.linalg.norm(b)
    if residual > SOLVE_RESIDUAL_TOL * max(scale, 1.0):
        raise SingularSystemError(
            f"solution residual {residual:.3e} exceeds tolerance"
        )
    return sol


def _shift_matrix_forward(x: np.ndarray, p: int) -> np.ndarray:
    # Row n-p holds [x_n, x_{n-1}, ..., x_{n-p}] for n in [p, N-1].
    n = len(x)
    return np.stack([x[p - j:n - j] for j in range(p + 1)], axis=1)


def _shift_matrix_backward(x: np.ndarray, p: int) -> np.ndarray:
    # Row n holds [x_n, x_{n+1}, ..., x_{n+p}] for n in [0, N-1-p].
    n = len(x)
    return np.stack([x[j:n - p + j] for j in range(p + 1)], axis=1)


def _weighted_gram(shifted: np.ndarray, w: np.ndarray) -> np.ndarray:
    return shifted.T @ (w[:, None] * shifted)


def _normal_equations(
    x: np.ndarray, p: int, w: np.ndarray, forward: bool, backward: bool
) -> tuple[NormalEquationSystem, np.ndarray]:
    n = len(x)
    m = np.zeros((p + 1, p + 1))
    if forward:
        m += _weighted_gram(_shift_matrix_forward(x, p), w[p:n])
    if backward:
        m += _weighted_gram(_shift_matrix_backward(x, p), w[:n - p])
    return NormalEquationSystem(m[1:, 1:], -m[1:, 0]), m


def _residual_energy(
    x: np.ndarray, a: np.ndarray, w: np.ndarray, forward: bool, backward: bool
) -> tuple[float, float]:
    p = len(a)
    n = len(x)
    poly = np.concatenate(([1.0], a))
    energy = 0.0
    weight_sum = 0.0
    if forward:
        e = _shift_matrix_forward(x, p) @ poly
        energy += np.dot(w[p:n], e * e)
        weight_sum += np.sum(w[p:n])
    if backward:
        e = _shift_matrix_backward(x, p) @ poly
        energy += np.dot(w[:n - p], e * e)
        weight_sum += np.sum(w[:n - p])
    return energy, weight_sum


def _finish_cov_model(
    x: np.ndarray, p: int, w: np.ndarray, forward: bool, backward: bool, tag: str
) -> AllPoleModel:
    system, _ = _normal_equations(x, p, w, forward, backward)
    a = solve_spd_system(system)
    energy, weight_sum = _residual_energy(x, a, w, forward, backward)
    gain = float(np.sqrt(max(energy, 0.0) / weight_sum)) if weight_sum > 0 else 0.0
    model = AllPoleModel(p, a, gain, tag)
    if np.max(np.abs(np.roots(model.polynomial()))) >= 1.0:
        # Covariance-family fits may leave poles on or outside the unit circle;
        # they are kept as-is for peak frequencies and only flagged.
        model.unstable = True
    return model


def lp_autocorrelation(frame: Frame, p: int = DEFAULT_ORDER) -> AllPoleModel:
    """Autocorrelation-method LP via Levinson-Durbin (minimum phase)."""
    x = frame.samples
    if p >= len(x):
        raise ValueError(f"order {p} must be < frame length {len(x)}")
    full = np.correlate(x, x, mode="full")
    r = full[len(x) - 1:len(x) + p]
    if r[0] <= 0.0:
        return _degenerate_model(p, METHOD_LP_ACOR)
    a, err = levinson_durbin(r, p)
    return AllPoleModel(p, a, float(np.sqrt(max(err, 0.0))), METHOD_LP_ACOR)


def lp_covariance(frame: Frame, p: int = DEFAULT_ORDER) -> AllPoleModel:
    """Covariance-method LP over in-frame samples only (forward error)."""
    x = frame.samples
    if p >= len(x):
        raise ValueError(f"order {p} must be < frame length {len(x)}")
    if not np.any(x):
        return _degenerate_model(p, METHOD_LP_COV)
    return _finish_cov_model(x, p, np.ones(len(x)), True, False, METHOD_LP_COV)


def lp_forward_backward_cov(frame: Frame, p: int = DEFAULT_ORDER) -> AllPoleModel:
    """Forward-backward covariance LP: both prediction directions, shared coefficients."""
    x = frame.samples
    if p >= len(x):
        raise ValueError(f"order {p} must be < frame length {len(x)}")
    if not np.any(x):
        return _degenerate_model(p, METHOD_LP_FBCOV)
    return _finish_cov_model(x, p, np.ones(len(x)), True, True, METHOD_LP_FBCOV)


def qcp_variant(
    frame: Frame,
    p: int,
    weights,
    mode: str,
) -> AllPoleModel:
    """Temporally weighted LP in autocorrelation, covariance, or FB-covariance form.

    `weights` is a glottal.WeightingFunction (or any array of per-sample weights),
    indexed by the predicted-sample position. The acor mode runs the prediction
    over the zero-padded frame (length N + p); cov and fbcov use only in-frame
    samples (length N).
    """
    if mode not in QCP_MODES:
        raise ValueError(f"mode must be one of {QCP_MODES}, got {mode!r}")
    x = frame.samples
    n = len(x)
    if p >= n:
        raise ValueError(f"order {p} must be < frame length {n}")
    w = np.asarray(getattr(weights, "weights", weights), dtype=np.float64)
    expected = n + p if mode == "acor" else n
    if len(w) != expected:
        raise ValueError(
            f"mode {mode!r} needs {expected} weights, got {len(w)}"
        )
    if np.any(w <= 0.0):
        raise ValueError("weights must be strictly positive")
    tag = {
        "acor": METHOD_QCP_ACOR,
        "cov": METHOD_QCP_COV,
        "fbcov": METHOD_QCP_FBCOV,
    }[mode]
    if not np.any(x):
        return _degenerate_model(p, tag)
    if mode == "acor":
        padded = np.concatenate((np.zeros(p), x, np.zeros(p)))
        return _finish_cov_model(
            padded, p, np.concatenate((np.zeros(p), w)), True, False, tag
        )
    return _finish_cov_model(x, p, w, True, mode == "fbcov", tag)
