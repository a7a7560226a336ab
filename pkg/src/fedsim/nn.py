"""Minimal dense-network core: forward pass, softmax cross-entropy with an
optional per-class logit shift or per-class loss weights, exact backprop, and
an SGD-with-momentum stepper.

All math is float64 and pure: every function returns fresh arrays and never
mutates its inputs, so calls are safe to fan out across threads. Parameters
live in a single flat vector whose layout is fixed by the architecture
(per layer: row-major weight matrix, then bias).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Architecture:
    """Dense net shape. Empty ``hidden_dims`` gives multinomial logistic regression."""

    input_dim: int
    hidden_dims: tuple[int, ...] = ()
    num_classes: int = 2
    activation: str = "relu"

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        if self.input_dim < 1:
            raise ConfigError(f"input_dim must be positive, got {self.input_dim}")
        if any(h < 1 for h in self.hidden_dims):
            raise ConfigError(f"hidden dims must be positive, got {self.hidden_dims}")
        if self.num_classes < 2:
            raise ConfigError(f"need at least 2 classes, got {self.num_classes}")
        if self.activation != "relu":
            raise ConfigError(f"unsupported activation {self.activation!r}")

    def layer_shapes(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) per layer, input to output order."""
        dims = (self.input_dim, *self.hidden_dims, self.num_classes)
        return [(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]

    @property
    def param_count(self) -> int:
        return sum((fi + 1) * fo for fi, fo in self.layer_shapes())


@dataclass(frozen=True)
class Batch:
    inputs: np.ndarray  # (batch, input_dim)
    labels: np.ndarray  # (batch,) ints in [0, K)

    def __post_init__(self):
        object.__setattr__(self, "inputs", np.asarray(self.inputs, dtype=np.float64))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))
        if self.inputs.ndim != 2 or len(self.labels) != self.inputs.shape[0]:
            raise ConfigError("batch inputs must be 2-D with one label per row")
        if len(self.labels) < 1:
            raise ConfigError("batch must contain at least one sample")


@dataclass(frozen=True)
class LossConfig:
    """Optional logit shift or per-class loss weights (never both).

    ``shift`` is added to the logits before the softmax; ``class_weights``
    multiply each sample's loss by the weight of its true class.
    """

    shift: np.ndarray | None = None
    class_weights: np.ndarray | None = None

    def __post_init__(self):
        if self.shift is not None:
            object.__setattr__(self, "shift", np.asarray(self.shift, dtype=np.float64))
        if self.class_weights is not None:
            object.__setattr__(
                self, "class_weights", np.asarray(self.class_weights, dtype=np.float64)
            )
        if self.shift is not None and self.class_weights is not None:
            raise ConfigError("shift and class_weights are mutually exclusive")
        if self.class_weights is not None and np.any(self.class_weights <= 0):
            raise ConfigError("class weights must be strictly positive")

    def check(self, num_classes: int) -> None:
        for name, vec in (("shift", self.shift), ("class_weights", self.class_weights)):
            if vec is not None and vec.shape != (num_classes,):
                raise ConfigError(f"{name} must have length {num_classes}, got {vec.shape}")


@dataclass(frozen=True)
class SgdHyper:
    learning_rate: float
    momentum: float = 0.0
    weight_decay: float = 0.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be > 0, got {self.learning_rate}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight decay must be >= 0, got {self.weight_decay}")


@dataclass(frozen=True)
class OptState:
    """Momentum buffer plus the hyperparameters it was built under."""

    momentum_buffer: np.ndarray
    hyper: SgdHyper

    @classmethod
    def fresh(cls, param_count: int, hyper: SgdHyper) -> "OptState":
        return cls(np.zeros(param_count), hyper)


def init_params(arch: Architecture, seed: int) -> np.ndarray:
    """Seeded uniform(-a, a) init per layer, a = sqrt(6 / (fan_in + fan_out))."""
    rng = np.random.default_rng(seed)
    chunks = []
    for fan_in, fan_out in arch.layer_shapes():
        a = np.sqrt(6.0 / (fan_in + fan_out))
        chunks.append(rng.uniform(-a, a, size=(fan_in + 1) * fan_out))
    return np.concatenate(chunks)


def unpack_params(params: np.ndarray, arch: Architecture) -> list[tuple[np.ndarray, np.ndarray]]:
    """Views of (weight, bias) per layer; weight is (fan_in, fan_out)."""
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (arch.param_count,):
        raise ConfigError(
            f"expected {arch.param_count} parameters for {arch}, got {params.shape}"
        )
    layers = []
    offset = 0
    for fan_in, fan_out in arch.layer_shapes():
        w = params[offset : offset + fan_in * fan_out].reshape(fan_in, fan_out)
        offset += fan_in * fan_out
        b = params[offset : offset + fan_out]
        offset += fan_out
        layers.append((w, b))
    return layers


def _forward_trace(params, arch, inputs):
    """Forward pass keeping pre-activations and activations for backprop."""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != arch.input_dim:
        raise ConfigError(
            f"inputs must be (batch, {arch.input_dim}), got {inputs.shape}"
        )
    layers = unpack_params(params, arch)
    activations = [inputs]
    pre_acts = []
    out = inputs
    for li, (w, b) in enumerate(layers):
        z = out @ w + b
        pre_acts.append(z)
        out = np.maximum(z, 0.0) if li < len(layers) - 1 else z
        activations.append(out)
    return layers, activations, pre_acts


def forward(params: np.ndarray, arch: Architecture, inputs: np.ndarray) -> np.ndarray:
    """Raw logits, (batch, K)."""
    _, activations, _ = _forward_trace(params, arch, inputs)
    return activations[-1]


def shifted_softmax_ce(
    logits: np.ndarray, labels: np.ndarray, cfg: LossConfig = LossConfig()
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy of softmax(logits + shift) and its gradient in the logits.

    With class weights each sample's loss (and gradient row) is scaled by the
    weight of its true class; the mean is still taken over the batch size.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n, k = logits.shape
    cfg.check(k)
    z = logits if cfg.shift is None else logits + cfg.shift
    z_max = z.max(axis=1, keepdims=True)
    log_probs = z - z_max - np.log(np.exp(z - z_max).sum(axis=1, keepdims=True))
    per_sample = -log_probs[np.arange(n), labels]
    probs = np.exp(log_probs)
    dlogits = probs
    dlogits[np.arange(n), labels] -= 1.0
    if cfg.class_weights is not None:
        w = cfg.class_weights[labels]
        per_sample = per_sample * w
        dlogits = dlogits * w[:, None]
    return float(per_sample.mean()), dlogits / n


def loss_and_grad(
    params: np.ndarray,
    arch: Architecture,
    batch: Batch,
    cfg: LossConfig = LossConfig(),
) -> tuple[float, np.ndarray]:
    """Mean batch loss and its exact gradient in the flat parameter vector."""
    layers, activations, pre_acts = _forward_trace(params, arch, batch.inputs)
    loss, dz = shifted_softmax_ce(activations[-1], batch.labels, cfg)
    grads = [None] * len(layers)
    for li in range(len(layers) - 1, -1, -1):
        w, _ = layers[li]
        dw = activations[li].T @ dz
        db = dz.sum(axis=0)
        grads[li] = (dw, db)
        if li > 0:
            dz = (dz @ w.T) * (pre_acts[li - 1] > 0.0)
    flat = np.concatenate([np.concatenate([dw.ravel(), db]) for dw, db in grads])
    return loss, flat


def grad(
    params: np.ndarray,
    arch: Architecture,
    batch: Batch,
    cfg: LossConfig = LossConfig(),
) -> np.ndarray:
    return loss_and_grad(params, arch, batch, cfg)[1]


def sgd_step(
    params: np.ndarray, gradient: np.ndarray, state: OptState
) -> tuple[np.ndarray, OptState]:
    """One momentum-SGD step with additive weight decay inside the gradient.

    buffer' = momentum * buffer + (grad + weight_decay * params)
    params' = params - lr * buffer'
    """
    h = state.hyper
    if params.shape != gradient.shape or params.shape != state.momentum_buffer.shape:
        raise ConfigError("params, gradient and momentum buffer must share a shape")
    g = gradient if h.weight_decay == 0.0 else gradient + h.weight_decay * params
    buf = h.momentum * state.momentum_buffer + g if h.momentum != 0.0 else g
    return params - h.learning_rate * buf, OptState(buf, h)


def predict_posterior(params: np.ndarray, arch: Architecture, inputs: np.ndarray) -> np.ndarray:
    """Softmax of the raw logits. Evaluation never applies a logit shift;
    the shift exists only inside local-training losses."""
    logits = forward(params, arch, inputs)
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)
