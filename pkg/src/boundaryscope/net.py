"""Minimal feed-forward classifier with an explicit embedding layer.

The network is a stack of fully connected ReLU layers followed by a linear
head.  The activations feeding the head are the embedding features; their
width is the embedding dimension.  Two variants share the code path:

* ``plain``:     h <- relu(W h + b) at every layer.
* ``residual``:  the first layer maps the input to the working width, every
                 later layer computes h <- relu(W h + b) + h, so zeroed block
                 weights make the block an identity map.

Gradients are exact backpropagation of the mean softmax cross-entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import BadClassError, BadSpecError, ShapeMismatchError

VARIANTS = ("plain", "residual")


@dataclass(frozen=True)
class NetConfig:
    input_dim: int
    hidden_widths: tuple[int, ...]
    num_classes: int
    variant: str = "plain"
    seed: int = 0

    @property
    def embedding_dim(self) -> int:
        return self.hidden_widths[-1]

    def validate(self) -> None:
        if self.input_dim < 1:
            raise BadSpecError("input_dim must be >= 1")
        if not self.hidden_widths or any(w < 1 for w in self.hidden_widths):
            raise BadSpecError("hidden widths must be positive")
        if self.embedding_dim < 2:
            raise BadSpecError("embedding dimension must be >= 2")
        if self.num_classes < 2:
            raise BadSpecError("need at least two classes")
        if self.variant not in VARIANTS:
            raise BadSpecError(f"unknown variant {self.variant!r}")
        if self.variant == "residual" and len(set(self.hidden_widths)) != 1:
            raise BadSpecError("residual variant requires equal hidden widths")


@dataclass
class ClassifierHead:
    weights: np.ndarray  # (C, d)
    bias: np.ndarray  # (C,)
    class_names: tuple[str, ...]


@dataclass
class NetParams:
    config: NetConfig
    layers: list[tuple[np.ndarray, np.ndarray]]  # (W: out x in, b: out)
    head: ClassifierHead


def _glorot_uniform(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


def init_params(config: NetConfig, class_names: tuple[str, ...] | None = None) -> NetParams:
    """Seeded uniform +-sqrt(6 / (fan_in + fan_out)) initialization per layer."""
    config.validate()
    if class_names is None:
        class_names = tuple(f"class{i}" for i in range(config.num_classes))
    if len(class_names) != config.num_classes:
        raise ShapeMismatchError(
            f"{len(class_names)} class names for {config.num_classes} classes"
        )
    rng = np.random.default_rng(config.seed)
    layers = []
    fan_in = config.input_dim
    for width in config.hidden_widths:
        layers.append((_glorot_uniform(rng, width, fan_in), np.zeros(width)))
        fan_in = width
    head = ClassifierHead(
        weights=_glorot_uniform(rng, config.num_classes, fan_in),
        bias=np.zeros(config.num_classes),
        class_names=class_names,
    )
    return NetParams(config=config, layers=layers, head=head)


def _check_batch(params: NetParams, batch: np.ndarray) -> np.ndarray:
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.config.input_dim:
        raise ShapeMismatchError(
            f"batch shape {x.shape} does not match input_dim {params.config.input_dim}"
        )
    return x


def forward(params: NetParams, batch) -> tuple[np.ndarray, np.ndarray]:
    """Return (embeddings n x d, logits n x C).  Pure; no side effects."""
    x = _check_batch(params, batch)
    residual = params.config.variant == "residual"
    h = x
    for i, (w, b) in enumerate(params.layers):
        z = np.maximum(h @ w.T + b, 0.0)
        h = z + h if residual and i > 0 else z
    logits = h @ params.head.weights.T + params.head.bias
    return h, logits


def full_softmax(logits) -> np.ndarray:
    """Row-wise softmax with max subtraction; rows sum to one."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grads(params: NetParams, batch, labels) -> tuple[float, NetParams]:
    """Mean softmax cross-entropy and its exact gradient.

    The gradient is returned in a NetParams-shaped container so optimizers
    can walk parameters and gradients in lockstep.
    """
    x = _check_batch(params, batch)
    y = np.asarray(labels)
    n = x.shape[0]
    if y.shape != (n,):
        raise ShapeMismatchError(f"labels shape {y.shape} does not match batch size {n}")
    if n and (y.min() < 0 or y.max() >= params.config.num_classes):
        raise ShapeMismatchError("label out of range")

    residual = params.config.variant == "residual"
    inputs = []  # per layer: the tensor multiplied by W
    pres = []  # per layer: pre-activation
    h = x
    for i, (w, b) in enumerate(params.layers):
        inputs.append(h)
        pre = h @ w.T + b
        pres.append(pre)
        z = np.maximum(pre, 0.0)
        h = z + h if residual and i > 0 else z

    logits = h @ params.head.weights.T + params.head.bias
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    loss = float(np.mean(log_norm - shifted[np.arange(n), y]))

    probs = full_softmax(logits)
    dlogits = probs
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n

    d_head_w = dlogits.T @ h
    d_head_b = dlogits.sum(axis=0)
    dh = dlogits @ params.head.weights

    grad_layers: list[tuple[np.ndarray, np.ndarray]] = [None] * len(params.layers)  # type: ignore[list-item]
    for i in range(len(params.layers) - 1, -1, -1):
        w, _ = params.layers[i]
        dpre = dh * (pres[i] > 0.0)
        grad_layers[i] = (dpre.T @ inputs[i], dpre.sum(axis=0))
        skip = dh if residual and i > 0 else 0.0
        dh = dpre @ w + skip

    grads = NetParams(
        config=params.config,
        layers=grad_layers,
        head=ClassifierHead(weights=d_head_w, bias=d_head_b, class_names=params.head.class_names),
    )
    return loss, grads


def pair_probability(head: ClassifierHead, embedding, i: int, j: int) -> float:
    """Probability of class i under the two-class softmax restricted to (i, j)."""
    c = head.weights.shape[0]
    if i == j or not (0 <= i < c) or not (0 <= j < c):
        raise BadClassError(f"bad class pair ({i}, {j}) for {c} classes")
    e = np.asarray(embedding, dtype=np.float64)
    z = float((head.weights[i] - head.weights[j]) @ e + head.bias[i] - head.bias[j])
    return _sigmoid(z)


def pair_probability_batch(head: ClassifierHead, embeddings: np.ndarray, i: int, j: int) -> np.ndarray:
    """Vectorized :func:`pair_probability` over rows of ``embeddings``."""
    c = head.weights.shape[0]
    if i == j or not (0 <= i < c) or not (0 <= j < c):
        raise BadClassError(f"bad class pair ({i}, {j}) for {c} classes")
    z = embeddings @ (head.weights[i] - head.weights[j]) + (head.bias[i] - head.bias[j])
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def params_to_list(params: NetParams) -> list[np.ndarray]:
    """Flatten to [layer0.W, layer0.b, ..., head.W, head.b] for optimizers."""
    out: list[np.ndarray] = []
    for w, b in params.layers:
        out.extend((w, b))
    out.extend((params.head.weights, params.head.bias))
    return out


def params_from_list(template: NetParams, arrays: list[np.ndarray]) -> NetParams:
    """Rebuild a NetParams from the flat array list (inverse of params_to_list)."""
    expected = 2 * len(template.layers) + 2
    if len(arrays) != expected:
        raise ShapeMismatchError(f"expected {expected} arrays, got {len(arrays)}")
    layers = [(arrays[2 * i], arrays[2 * i + 1]) for i in range(len(template.layers))]
    head = ClassifierHead(
        weights=arrays[-2], bias=arrays[-1], class_names=template.head.class_names
    )
    return NetParams(config=template.config, layers=layers, head=head)


def clone_params(params: NetParams) -> NetParams:
    return NetParams(
        config=params.config,
        layers=[(w.copy(), b.copy()) for w, b in params.layers],
        head=ClassifierHead(
            weights=params.head.weights.copy(),
            bias=params.head.bias.copy(),
            class_names=params.head.class_names,
        ),
    )
