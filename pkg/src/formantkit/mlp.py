"""Feed-forward formant predictor: tanh hidden layers, linear output, SGD training."""

import struct
import warnings
from dataclasses import dataclass

import numpy as np

DEFAULT_LAYER_DIMS = (143, 300, 300, 300, 3)
INPUT_NORM_LO = 0.1
INPUT_NORM_HI = 0.9

MODEL_MAGIC = b"FMLP"
MODEL_VERSION = 1


class ModelFormatError(Exception):
    """Raised for unreadable model files."""


@dataclass
class MlpModel:
    layer_dims: tuple
    weights: list        # weights[l]: (dims[l], dims[l+1])
    biases: list         # biases[l]: (dims[l+1],)
    input_min: np.ndarray
    input_max: np.ndarray
    output_mean: np.ndarray
    output_std: np.ndarray

    def validate(self):
        dims = self.layer_dims
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (dims[l], dims[l + 1]) or b.shape != (dims[l + 1],):
                raise ValueError(f"layer {l} parameter shapes do not match {dims}")
        if np.any(self.output_std <= 0):
            raise ValueError("output stds must be positive")
        for arr in (*self.weights, *self.biases, self.input_min, self.input_max,
                    self.output_mean, self.output_std):
            if not np.all(np.isfinite(arr)):
                raise ValueError("model parameters must be finite")


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 50
    batch_size: int = 64
    dropout_prob: float = 0.2
    seed: int = 0
    val_fraction: float = 0.1
    lr_decay: float = 0.5

    def validate(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 <= self.dropout_prob < 1.0:
            raise ValueError(f"dropout_prob must be in [0, 1), got {self.dropout_prob}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


def normalize_inputs(model: MlpModel, x: np.ndarray) -> np.ndarray:
    span = model.input_max - model.input_min
    scale = np.where(span > 0, span, 1.0)
    lo, hi = INPUT_NORM_LO, INPUT_NORM_HI
    return lo + (hi - lo) * (x - model.input_min) / scale


def _hidden_forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    h = normalize_inputs(model, np.atleast_2d(x))
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        h = np.tanh(h @ w + b)
    return h @ model.weights[-1] + model.biases[-1]


def forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Predict formant frequencies in Hz; accepts one vector or a batch."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if np.atleast_2d(x).shape[1] != model.layer_dims[0]:
        raise ValueError(
            f"input dimension {np.atleast_2d(x).shape[1]} != {model.layer_dims[0]}"
        )
    y = _hidden_forward(model, x) * model.output_std + model.output_mean
    return y[0] if single else y


def init_model(
    layer_dims: tuple, rng: np.random.Generator,
    input_min=None, input_max=None, output_mean=None, output_std=None,
) -> MlpModel:
    """Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases."""
    weights, biases = [], []
    for d_in, d_out in zip(layer_dims[:-1], layer_dims[1:]):
        bound = np.sqrt(6.0 / (d_in + d_out))
        weights.append(rng.uniform(-bound, bound, size=(d_in, d_out)))
        biases.append(np.zeros(d_out))
    d0, dy = layer_dims[0], layer_dims[-1]
    return MlpModel(
        tuple(layer_dims), weights, biases,
        np.zeros(d0) if input_min is None else np.asarray(input_min, dtype=np.float64),
        np.ones(d0) if input_max is None else np.asarray(input_max, dtype=np.float64),
        np.zeros(dy) if output_mean is None else np.asarray(output_mean, dtype=np.float64),
        np.ones(dy) if output_std is None else np.asarray(output_std, dtype=np.float64),
    )


def _batch_gradients(model, xb, yb, dropout_prob, rng):
    """Backprop of mean squared error over the batch; returns (grads_w, grads_b, loss)."""
    layer_in = [normalize_inputs(model, xb)]  # input seen by each layer
    tanh_out = []                             # pre-dropout tanh activations
    masks = []
    h = layer_in[0]
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        t = np.tanh(h @ w + b)
        tanh_out.append(t)
        if dropout_prob > 0.0:
            mask = (rng.random(t.shape) >= dropout_prob) / (1.0 - dropout_prob)
            h = t * mask
        else:
            mask = None
            h = t
        masks.append(mask)
        layer_in.append(h)
    out = h @ model.weights[-1] + model.biases[-1]
    diff = out - yb
    loss = float(np.mean(diff * diff))

    n = len(xb)
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    delta = 2.0 * diff / (n * yb.shape[1])
    grads_w[-1] = layer_in[-1].T @ delta
    grads_b[-1] = delta.sum(axis=0)
    for l in range(len(model.weights) - 2, -1, -1):
        delta = delta @ model.weights[l + 1].T
        if masks[l] is not None:
            delta = delta * masks[l]
        delta = delta * (1.0 - tanh_out[l] ** 2)
        grads_w[l] = layer_in[l].T @ delta
        grads_b[l] = delta.sum(axis=0)
    return grads_w, grads_b, loss


def train(
    inputs: np.ndarray,
    targets_hz: np.ndarray,
    config: TrainConfig | None = None,
    layer_dims: tuple = DEFAULT_LAYER_DIMS,
) -> tuple[MlpModel, dict]:
    """Mini-batch SGD on normalized targets; returns (model, history).

    Inputs map to [0.1, 0.9] per dimension using training-set min/max; targets
    are standardized per dimension. The learning rate halves whenever the
    epoch's validation loss fails to improve. Deterministic for a fixed seed.
    """
    cfg = config or TrainConfig()
    cfg.validate()
    x = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(targets_hz, dtype=np.float64)
    if x.ndim != 2 or len(x) < 1 or len(x) != len(y):
        raise ValueError("need matching non-empty input/target arrays")
    dims = (x.shape[1],) + tuple(layer_dims[1:-1]) + (y.shape[1],)

    out_mean = y.mean(axis=0)
    out_std = y.std(axis=0)
    if np.any(out_std == 0):
        warnings.warn("constant training target; unit std substituted")
        out_std = np.where(out_std == 0, 1.0, out_std)

    rng = np.random.default_rng(cfg.seed)
    model = init_model(
        dims, rng,
        input_min=x.min(axis=0), input_max=x.max(axis=0),
        output_mean=out_mean, output_std=out_std,
    )
    y_norm = (y - out_mean) / out_std

    order = rng.permutation(len(x))
    n_val = int(round(cfg.val_fraction * len(x)))
    n_val = min(max(n_val, 0), len(x) - 1)
    val_idx, train_idx = order[:n_val], order[n_val:]

    lr = cfg.learning_rate
    best_val = np.inf
    history = {"train_loss": [], "val_loss": []}
    for _ in range(cfg.epochs):
        perm = rng.permutation(len(train_idx))
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(perm), cfg.batch_size):
            idx = train_idx[perm[start:start + cfg.batch_size]]
            gw, gb, loss = _batch_gradients(
                model, x[idx], y_norm[idx], cfg.dropout_prob, rng
            )
            for l in range(len(model.weights)):
                model.weights[l] -= lr * gw[l]
                model.biases[l] -= lr * gb[l]
            epoch_loss += loss
            n_batches += 1
        train_loss = epoch_loss / max(n_batches, 1)
        if len(val_idx):
            pred = _hidden_forward(model, x[val_idx])
            val_loss = float(np.mean((pred - y_norm[val_idx]) ** 2))
        else:
            val_loss = train_loss
        history["train_loss"].append(train_loss)
        history["val_loss"].append(val_loss)
        if val_loss >= best_val:
            lr *= cfg.lr_decay
        else:
            best_val = val_loss
        model.validate()
    fee_idx = val_idx if len(val_idx) else train_idx
    pred_hz = _hidden_forward(model, x[fee_idx]) * out_std + out_mean
    history["val_fee_hz"] = np.mean(np.abs(np.sort(pred_hz, axis=1) - y[fee_idx]), axis=0)
    return model, history


def serialize(model: MlpModel) -> bytes:
    """FMLP container: magic, u8 version, u8 layer count, u32 dims, f64 params."""
    model.validate()
    parts = [struct.pack("<4sBB", MODEL_MAGIC, MODEL_VERSION, len(model.layer_dims))]
    parts.append(struct.pack(f"<{len(model.layer_dims)}I", *model.layer_dims))
    for w, b in zip(model.weights, model.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    for arr in (model.input_min, model.input_max, model.output_mean, model.output_std):
        parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return b"".join(parts)


def deserialize(payload: bytes) -> MlpModel:
    if len(payload) < 6:
        raise ModelFormatError("truncated model header")
    magic, version, n_dims = struct.unpack("<4sBB", payload[:6])
    if magic != MODEL_MAGIC:
        raise ModelFormatError(f"bad magic {magic!r}")
    if version != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {version}")
    offset = 6
    if len(payload) < offset + 4 * n_dims:
        raise ModelFormatError("truncated dimension table")
    dims = struct.unpack(f"<{n_dims}I", payload[offset:offset + 4 * n_dims])
    offset += 4 * n_dims

    def take(count):
        nonlocal offset
        nbytes = 8 * count
        if len(payload) < offset + nbytes:
            raise ModelFormatError("truncated parameter payload")
        arr = np.frombuffer(payload[offset:offset + nbytes], dtype="<f8").copy()
        offset += nbytes
        return arr

    weights, biases = [], []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        weights.append(take(d_in * d_out).reshape(d_in, d_out))
        biases.append(take(d_out))
    model = MlpModel(
        tuple(dims), weights, biases,
        take(dims[0]), take(dims[0]), take(dims[-1]), take(dims[-1]),
    )
    model.validate()
    return model


def save_model(path, model: MlpModel) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(model))


def load_model(path) -> MlpModel:
    with open(path, "rb") as fh:
        return deserialize(fh.read())
