"""Target networks: autoencoders and classifiers trained on normal data only.

The target performs a task unrelated to anomaly detection; after training it
is frozen and only its hidden activations are consumed downstream.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from actalarm.nn import Activation, AdamState, DenseLayer, Network, mse_loss, softmax_cross_entropy
from actalarm.util import batch_indices, derive_rng, ensure_finite

DROPOUT_RATE = 0.1  # single dropout before the final layer of every trained network


class TargetKind(enum.Enum):
    AUTOENCODER = "autoencoder"
    CLASSIFIER = "classifier"


@dataclass
class TargetSpec:
    kind: TargetKind
    hidden_widths: list[int]
    input_dim: int
    n_classes: int = 0

    def __post_init__(self):
        if not self.hidden_widths:
            raise ValueError("hidden_widths must not be empty")
        if self.kind is TargetKind.CLASSIFIER and self.n_classes < 2:
            raise ValueError("a classifier target needs n_classes >= 2")

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "hidden_widths": list(self.hidden_widths),
                "input_dim": self.input_dim, "n_classes": self.n_classes}

    @classmethod
    def from_dict(cls, doc: dict) -> "TargetSpec":
        return cls(kind=TargetKind(doc["kind"]), hidden_widths=list(doc["hidden_widths"]),
                   input_dim=doc["input_dim"], n_classes=doc["n_classes"])


# Hidden widths per dataset; image presets are dense substitutes sized for
# 784-dim inputs, tabular presets take input_dim at build time.
PRESET_HIDDEN: dict[str, dict] = {
    "nsl-kdd": {"kind": TargetKind.AUTOENCODER, "hidden": [200, 100, 50, 25, 50, 100, 200]},
    "ids": {"kind": TargetKind.AUTOENCODER, "hidden": [150, 80, 40, 20, 40, 80, 150]},
    "creditcard": {"kind": TargetKind.AUTOENCODER, "hidden": [50, 25, 10, 5, 10, 25, 50]},
    "mnist-dense-ae": {"kind": TargetKind.AUTOENCODER, "hidden": [512, 256, 64, 256, 512]},
    "mnist-dense-clf": {"kind": TargetKind.CLASSIFIER, "hidden": [512, 256, 128], "n_classes": 10},
}


def preset_spec(name: str, input_dim: int, n_classes: int | None = None) -> TargetSpec:
    if name not in PRESET_HIDDEN:
        raise KeyError(f"unknown target preset {name!r}; available: {sorted(PRESET_HIDDEN)}")
    preset = PRESET_HIDDEN[name]
    return TargetSpec(
        kind=preset["kind"],
        hidden_widths=list(preset["hidden"]),
        input_dim=input_dim,
        n_classes=n_classes if n_classes is not None else preset.get("n_classes", 0),
    )


def build_target(spec: TargetSpec, seed: int = 0) -> Network:
    """ReLU hidden stack plus a sigmoid reconstruction head (AE) or linear
    class-score head (classifier). Dropout 0.1 sits before the final layer."""
    rng = derive_rng(seed, "target-init")
    out_dim = spec.input_dim if spec.kind is TargetKind.AUTOENCODER else spec.n_classes
    out_act = Activation.SIGMOID if spec.kind is TargetKind.AUTOENCODER else Activation.LINEAR
    widths = [spec.input_dim] + list(spec.hidden_widths) + [out_dim]
    layers = []
    for i in range(len(widths) - 1):
        act = out_act if i == len(widths) - 2 else Activation.RELU
        dropout = DROPOUT_RATE if i == len(widths) - 3 else 0.0
        layers.append(DenseLayer.create(widths[i], widths[i + 1], act, rng, dropout_rate=dropout))
    return Network(layers)


def train_target(net: Network, spec: TargetSpec, x: np.ndarray,
                 labels: np.ndarray | None = None, epochs: int = 30, lr: float = 0.001,
                 batch_size: int = 256, seed: int = 0) -> list[float]:
    """Train in place on normal data; returns per-epoch mean losses.

    Autoencoders reconstruct their input (MSE); classifiers minimize
    cross-entropy on ``labels``. The network is frozen afterwards.
    """
    x = ensure_finite("training data", np.asarray(x, dtype=np.float64))
    if x.shape[0] == 0:
        raise ValueError("training data is empty")
    if spec.kind is TargetKind.CLASSIFIER:
        if labels is None:
            raise ValueError("classifier target needs labels")
        labels = np.asarray(labels)
    shuffle_rng = derive_rng(seed, "target-shuffle")
    dropout_rng = derive_rng(seed, "target-dropout")
    adam = AdamState(net.parameters(), lr=lr)
    history = []
    for _ in range(epochs):
        losses = []
        for idx in batch_indices(x.shape[0], batch_size, shuffle_rng):
            batch = x[idx]
            out, _ = net.forward(batch, mode="train", rng=dropout_rng)
            if spec.kind is TargetKind.AUTOENCODER:
                loss, grad = mse_loss(out, batch)
            else:
                loss, grad = softmax_cross_entropy(out, labels[idx])
            grads, _ = net.backprop(grad)
            adam.step(net.parameters(), grads)
            losses.append(loss)
        history.append(float(np.mean(losses)))
    net.freeze()
    return history
