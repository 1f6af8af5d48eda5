"""Dense-network math in float64: init, forward/backward with dropout, BCE, Adam.

Conventions
-----------
* Weights are stored ``(out_dim, in_dim)``; a layer computes ``x @ W.T + b``.
* ``backward`` applies the chain rule to whatever ``output_grad`` it is given.
  Loss functions are responsible for their own reduction, and
  ``bce_with_logits`` already returns the gradient of the *mean* loss
  (``(sigmoid(x) - t) / n``), so a batch-mean convention falls out naturally.
* Dropout is inverted dropout on hidden-layer outputs only: kept units are
  scaled by ``1 / (1 - rate)`` during training and evaluation needs no rescale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

from .errors import DomainError, NumericError, ShapeError

ACTIVATIONS = ("identity", "sigmoid", "relu", "leaky_relu")


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    activation: str = "identity"
    slope: float = 0.01  # leaky_relu only

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ShapeError(f"layer dims must be >= 1, got {self.in_dim}x{self.out_dim}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


def dense_specs(widths: Sequence[int], hidden: str = "relu", output: str = "identity") -> list[LayerSpec]:
    """Chain ``[in, h1, ..., out]`` into layer specs."""
    if len(widths) < 2:
        raise ShapeError("need at least an input and an output width")
    n = len(widths) - 1
    return [
        LayerSpec(widths[i], widths[i + 1], output if i == n - 1 else hidden)
        for i in range(n)
    ]


@dataclass
class MlpParams:
    layers: tuple[LayerSpec, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def copy(self) -> "MlpParams":
        return MlpParams(self.layers, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def arrays(self) -> list[np.ndarray]:
        """Weights and biases interleaved, layer by layer."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def n_params(self) -> int:
        return sum(a.size for a in self.arrays())

    def equals(self, other: "MlpParams") -> bool:
        """Bitwise equality of specs and parameters."""
        if self.layers != other.layers:
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.arrays(), other.arrays()))


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    inputs: np.ndarray  # dL/d(batch), for chaining into an upstream network


@dataclass
class ForwardCache:
    inputs: np.ndarray
    pre: list[np.ndarray] = field(default_factory=list)  # z = a_prev @ W.T + b
    post: list[np.ndarray] = field(default_factory=list)  # activation(z), before dropout
    masks: list[np.ndarray | None] = field(default_factory=list)  # 0/1 keep masks
    scales: list[float] = field(default_factory=list)


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    learning_rate: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0


def check_chain(specs: Sequence[LayerSpec]) -> None:
    if not specs:
        raise ShapeError("network needs at least one layer")
    for i in range(len(specs) - 1):
        if specs[i].out_dim != specs[i + 1].in_dim:
            raise ShapeError(
                f"layer {i} out_dim {specs[i].out_dim} != layer {i + 1} in_dim {specs[i + 1].in_dim}"
            )


def init_mlp(specs: Sequence[LayerSpec], rng: np.random.Generator) -> MlpParams:
    """Gaussian init: He scale for (leaky) relu layers, Xavier-style sqrt(1/in) otherwise."""
    check_chain(specs)
    weights, biases = [], []
    for spec in specs:
        if spec.activation in ("relu", "leaky_relu"):
            scale = np.sqrt(2.0 / spec.in_dim)
        else:
            scale = np.sqrt(1.0 / spec.in_dim)
        weights.append(rng.normal(0.0, scale, size=(spec.out_dim, spec.in_dim)))
        biases.append(np.zeros(spec.out_dim))
    return MlpParams(tuple(specs), weights, biases)


def sigmoid(x):
    return expit(x)


def _activate(spec: LayerSpec, z: np.ndarray) -> np.ndarray:
    act = spec.activation
    if act == "identity":
        return z
    if act == "sigmoid":
        return expit(z)
    if act == "relu":
        return np.maximum(z, 0.0)
    return np.where(z > 0, z, spec.slope * z)


def _activation_grad(spec: LayerSpec, z: np.ndarray, h: np.ndarray) -> np.ndarray:
    # h is the activation output before dropout
    act = spec.activation
    if act == "identity":
        return np.ones_like(z)
    if act == "sigmoid":
        return h * (1.0 - h)
    if act == "relu":
        return (z > 0).astype(z.dtype)
    return np.where(z > 0, 1.0, spec.slope)


def forward(
    params: MlpParams,
    batch: np.ndarray,
    train_mode: bool = False,
    dropout_rate: float = 0.0,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, ForwardCache]:
    """Run the network on ``batch`` (n x in_dim) and return outputs plus a cache.

    Dropout only fires when ``train_mode`` is on and the rate is positive, in
    which case ``rng`` must be given; no random numbers are consumed otherwise.
    """
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.in_dim:
        raise ShapeError(f"batch shape {x.shape} does not match input width {params.in_dim}")
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite value in network input")
    if not 0.0 <= dropout_rate <= 1.0:
        raise ValueError(f"dropout_rate must lie in [0, 1], got {dropout_rate}")
    use_dropout = train_mode and dropout_rate > 0.0
    if use_dropout and rng is None:
        raise ValueError("dropout in train mode needs an rng")

    cache = ForwardCache(inputs=x)
    a = x
    last = len(params.layers) - 1
    for i, (spec, w, b) in enumerate(zip(params.layers, params.weights, params.biases)):
        z = a @ w.T + b
        h = _activate(spec, z)
        mask, scale = None, 1.0
        if use_dropout and i < last:
            mask = (rng.random(h.shape) >= dropout_rate).astype(np.float64)
            scale = 0.0 if dropout_rate >= 1.0 else 1.0 / (1.0 - dropout_rate)
            a = h * mask * scale
        else:
            a = h
        cache.pre.append(z)
        cache.post.append(h)
        cache.masks.append(mask)
        cache.scales.append(scale)
    return a, cache


def predict(params: MlpParams, batch: np.ndarray) -> np.ndarray:
    """Evaluation-mode forward pass."""
    return forward(params, batch)[0]


def backward(params: MlpParams, cache: ForwardCache, output_grad: np.ndarray) -> Gradients:
    """Backpropagate ``output_grad`` (dL/d outputs) through the cached pass."""
    n_layers = len(params.layers)
    if len(cache.pre) != n_layers:
        raise ShapeError(f"cache has {len(cache.pre)} layers, params have {n_layers}")
    delta = np.asarray(output_grad, dtype=np.float64)
    if delta.shape != cache.post[-1].shape:
        raise ShapeError(f"output_grad shape {delta.shape} != output shape {cache.post[-1].shape}")
    for i, z in enumerate(cache.pre):
        if z.shape[1] != params.layers[i].out_dim:
            raise ShapeError(f"cache layer {i} width {z.shape[1]} != {params.layers[i].out_dim}")

    gw: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    gb: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    for i in range(n_layers - 1, -1, -1):
        spec = params.layers[i]
        if cache.masks[i] is not None:
            delta = delta * cache.masks[i] * cache.scales[i]
        delta = delta * _activation_grad(spec, cache.pre[i], cache.post[i])
        a_prev = cache.inputs if i == 0 else _dropped(cache, i - 1)
        gw[i] = delta.T @ a_prev
        gb[i] = delta.sum(axis=0)
        delta = delta @ params.weights[i]
    return Gradients(gw, gb, delta)


def _dropped(cache: ForwardCache, i: int) -> np.ndarray:
    if cache.masks[i] is None:
        return cache.post[i]
    return cache.post[i] * cache.masks[i] * cache.scales[i]


def bce_with_logits(logits, targets) -> tuple[float, np.ndarray]:
    """Mean binary cross-entropy on logits and its gradient w.r.t. the logits.

    Uses ``max(x, 0) - x*t + log1p(exp(-|x|))`` so that no exponential can
    overflow for any finite logit.
    """
    x = np.asarray(logits, dtype=np.float64).ravel()
    t = np.asarray(targets, dtype=np.float64).ravel()
    if x.size == 0:
        raise DomainError("bce_with_logits on empty input")
    if x.shape != t.shape:
        raise ShapeError(f"logits {x.shape} and targets {t.shape} differ")
    if np.any((t < 0.0) | (t > 1.0)):
        raise DomainError("targets must lie in [0, 1]")
    n = x.size
    per = np.maximum(x, 0.0) - x * t + np.log1p(np.exp(-np.abs(x)))
    grad = (expit(x) - t) / n
    return float(per.mean()), grad


def init_adam(params: MlpParams, learning_rate: float = 0.002, beta1: float = 0.9,
              beta2: float = 0.999, epsilon: float = 1e-8) -> AdamState:
    zeros = [np.zeros_like(a) for a in params.arrays()]
    return AdamState(
        m=zeros,
        v=[z.copy() for z in zeros],
        learning_rate=learning_rate,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
    )


def adam_step(params: MlpParams, grads: Gradients, state: AdamState) -> tuple[MlpParams, AdamState]:
    """One bias-corrected Adam update. Inputs are left untouched."""
    flat_g = []
    for i, (gw, gb) in enumerate(zip(grads.weights, grads.biases)):
        if gw.shape != params.weights[i].shape or gb.shape != params.biases[i].shape:
            raise ShapeError(f"gradient shape mismatch at layer {i}")
        if not (np.all(np.isfinite(gw)) and np.all(np.isfinite(gb))):
            raise NumericError(f"non-finite gradient in layer {i}")
        flat_g.extend((gw, gb))

    b1, b2, eps, lr = state.beta1, state.beta2, state.epsilon, state.learning_rate
    t = state.t + 1
    new_m, new_v, new_arrays = [], [], []
    for p, g, m, v in zip(params.arrays(), flat_g, state.m, state.v):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * (g * g)
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        new_arrays.append(p - lr * m_hat / (np.sqrt(v_hat) + eps))
        new_m.append(m)
        new_v.append(v)
    new_params = MlpParams(params.layers, new_arrays[0::2], new_arrays[1::2])
    new_state = AdamState(new_m, new_v, lr, b1, b2, eps, t)
    return new_params, new_state
