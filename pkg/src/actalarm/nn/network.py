"""Dense layers, forward pass with activation capture, and backpropagation.

Everything runs in float64. Training-mode forward caches per-layer
intermediates on the network; ``Network.backprop`` consumes that cache and
returns gradients without touching the parameters, so optimizers stay
separate from the chain rule.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from actalarm.util import NotTrainedError, ShapeError


class Activation(enum.Enum):
    RELU = "relu"
    SIGMOID = "sigmoid"
    LINEAR = "linear"


def _apply(act: Activation, z: np.ndarray) -> np.ndarray:
    if act is Activation.RELU:
        return np.maximum(z, 0.0)
    if act is Activation.SIGMOID:
        # split by sign to avoid overflow in exp
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    return z


def _derivative(act: Activation, z: np.ndarray, h: np.ndarray) -> np.ndarray:
    """d(activation)/dz, using the cached post-activation h where cheaper."""
    if act is Activation.RELU:
        return (z > 0.0).astype(np.float64)
    if act is Activation.SIGMOID:
        return h * (1.0 - h)
    return np.ones_like(z)


def glorot_init(in_dim: int, out_dim: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform Glorot-style weights: +-sqrt(6 / (fan_in + fan_out))."""
    limit = np.sqrt(6.0 / (in_dim + out_dim))
    return rng.uniform(-limit, limit, size=(out_dim, in_dim))


@dataclass
class DenseLayer:
    """One fully-connected layer: h = act(W @ h_prev + b).

    ``dropout_rate`` drops units of this layer's *output* during training
    (inverted dropout); inference mode is always the identity.
    """

    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray     # (out_dim,)
    activation: Activation = Activation.RELU
    dropout_rate: float = 0.0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64).reshape(-1)
        if self.weights.ndim != 2:
            raise ShapeError(f"weights must be 2-D, got shape {self.weights.shape}")
        if self.bias.shape[0] != self.weights.shape[0]:
            raise ShapeError(
                f"bias length {self.bias.shape[0]} != weight rows {self.weights.shape[0]}",
                expected=self.weights.shape[0], actual=self.bias.shape[0],
            )
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")

    @classmethod
    def create(cls, in_dim: int, out_dim: int, activation: Activation,
               rng: np.random.Generator, dropout_rate: float = 0.0) -> "DenseLayer":
        return cls(
            weights=glorot_init(in_dim, out_dim, rng),
            bias=np.zeros(out_dim),
            activation=activation,
            dropout_rate=dropout_rate,
        )

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class ActivationTrace:
    """Hidden activations h_1 .. h_{L-1} for one batch.

    Excludes the input (h_0) and the final output layer, so the concatenated
    width is the sum of the non-output layer widths.
    """

    layers: list[np.ndarray] = field(default_factory=list)

    @property
    def width(self) -> int:
        return sum(h.shape[1] for h in self.layers)

    def concat(self) -> np.ndarray:
        if not self.layers:
            raise ValueError("empty trace: network has no hidden layers")
        return np.concatenate(self.layers, axis=1)


@dataclass
class _LayerCache:
    x: np.ndarray        # layer input
    z: np.ndarray        # pre-activation
    h: np.ndarray        # post-activation, pre-dropout
    mask: np.ndarray | None  # dropout keep mask scaled by 1/(1-p), or None


class Network:
    """Ordered chain of dense layers with forward-with-trace and backprop."""

    def __init__(self, layers: list[DenseLayer]):
        if not layers:
            raise ValueError("a network needs at least one layer")
        for i in range(len(layers) - 1):
            if layers[i].out_dim != layers[i + 1].in_dim:
                raise ShapeError(
                    f"layer {i} out_dim {layers[i].out_dim} != layer {i + 1} "
                    f"in_dim {layers[i + 1].in_dim}",
                    expected=layers[i].out_dim, actual=layers[i + 1].in_dim,
                    where=f"layer {i + 1}",
                )
        self.layers = layers
        self.frozen = False
        self._cache: list[_LayerCache] | None = None

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def parameters(self) -> list[np.ndarray]:
        """Flat view of all weights and biases, in layer order. Arrays are live."""
        params: list[np.ndarray] = []
        for layer in self.layers:
            params.append(layer.weights)
            params.append(layer.bias)
        return params

    def freeze(self) -> "Network":
        self.frozen = True
        return self

    def forward(self, x: np.ndarray, mode: str = "infer",
                rng: np.random.Generator | None = None) -> tuple[np.ndarray, ActivationTrace]:
        """Run the batch through the chain.

        Returns the final-layer output and the trace of all intermediate
        activations. In ``infer`` mode dropout is the identity; in ``train``
        mode dropout masks come from ``rng`` and per-layer intermediates are
        cached for a following :meth:`backprop` call.
        """
        if mode not in ("train", "infer"):
            raise ValueError(f"mode must be 'train' or 'infer', got {mode!r}")
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.in_dim:
            raise ShapeError(
                f"input has {x.shape[1]} columns, layer 0 expects {self.in_dim}",
                expected=self.in_dim, actual=x.shape[1], where="layer 0",
            )
        training = mode == "train"
        if training and any(l.dropout_rate > 0 for l in self.layers) and rng is None:
            raise ValueError("train-mode forward with dropout needs an rng")

        cache: list[_LayerCache] = []
        trace: list[np.ndarray] = []
        h = x
        for i, layer in enumerate(self.layers):
            z = h @ layer.weights.T + layer.bias
            a = _apply(layer.activation, z)
            mask = None
            out = a
            if training and layer.dropout_rate > 0.0:
                keep = 1.0 - layer.dropout_rate
                mask = (rng.random(a.shape) < keep).astype(np.float64) / keep
                out = a * mask
            if training:
                cache.append(_LayerCache(x=h, z=z, h=a, mask=mask))
            if i < len(self.layers) - 1:
                trace.append(out)
            h = out
        if training:
            self._cache = cache
        return h, ActivationTrace(layers=trace)

    def backprop(self, grad_out: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        """Reverse-mode pass using the cache of the last train-mode forward.

        Returns ``(grads, grad_input)`` where ``grads`` mirrors
        :meth:`parameters` ([dW0, db0, dW1, db1, ...]) and ``grad_input`` is
        the loss gradient w.r.t. the forward input. Parameters are not
        mutated; the cache is consumed.
        """
        if self._cache is None:
            raise NotTrainedError("backprop called without a preceding train-mode forward")
        cache, self._cache = self._cache, None
        grad = np.asarray(grad_out, dtype=np.float64)
        if grad.shape != cache[-1].h.shape:
            raise ShapeError(
                f"grad_out shape {grad.shape} != forward output shape {cache[-1].h.shape}",
                expected=cache[-1].h.shape, actual=grad.shape,
            )
        grads: list[np.ndarray] = [np.empty(0)] * (2 * len(self.layers))
        for i in range(len(self.layers) - 1, -1, -1):
            layer, c = self.layers[i], cache[i]
            if c.mask is not None:
                grad = grad * c.mask
            dz = grad * _derivative(layer.activation, c.z, c.h)
            grads[2 * i] = dz.T @ c.x
            grads[2 * i + 1] = dz.sum(axis=0)
            grad = dz @ layer.weights
        return grads, grad
