"""Alarm network and the combined detector.

The alarm never sees raw inputs: it classifies the frozen target's
concatenated hidden activations. Training mixes real samples (normals plus
a capped handful of labeled anomalies) with generated counterexamples
pinned to label 1, weighted by lambda.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from actalarm.generators import NoiseGenerator, VaeGenerator
from actalarm.nn import Activation, AdamState, DenseLayer, Network, bce_loss
from actalarm.target import DROPOUT_RATE
from actalarm.util import ShapeError, batch_indices, derive_rng, ensure_finite


@dataclass
class AlarmSpec:
    hidden_widths: list[int] = field(default_factory=lambda: [1000, 500, 200, 75])
    lam: float = 1.0               # weight of the counterexample term
    lr: float = 1e-5
    epochs: int = 60
    batch_size: int = 256
    shift_reg_weight: float = 0.0  # optional |1 - y| output shift, off by default
    anomaly_fraction: float = 0.1  # oversampled share of real anomalies per minibatch

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")

    def to_dict(self) -> dict:
        return {"hidden_widths": list(self.hidden_widths), "lam": self.lam, "lr": self.lr,
                "epochs": self.epochs, "batch_size": self.batch_size,
                "shift_reg_weight": self.shift_reg_weight,
                "anomaly_fraction": self.anomaly_fraction}

    @classmethod
    def from_dict(cls, doc: dict) -> "AlarmSpec":
        return cls(**doc)


def trace_features(target: Network, x: np.ndarray) -> np.ndarray:
    """Concatenated hidden activations h_1..h_{L-1} of the frozen target.

    Always runs in inference mode: features are deterministic and exclude
    both the raw input and the target's output layer.
    """
    _, trace = target.forward(x, mode="infer")
    return trace.concat()


def trace_width(target: Network) -> int:
    return sum(layer.out_dim for layer in target.layers[:-1])


def build_alarm(input_width: int, spec: AlarmSpec, seed: int = 0) -> Network:
    """ReLU hidden stack, single sigmoid output, dropout before the last layer."""
    rng = derive_rng(seed, "alarm-init")
    widths = [input_width] + list(spec.hidden_widths) + [1]
    layers = []
    for i in range(len(widths) - 1):
        act = Activation.SIGMOID if i == len(widths) - 2 else Activation.RELU
        dropout = DROPOUT_RATE if i == len(widths) - 3 else 0.0
        layers.append(DenseLayer.create(widths[i], widths[i + 1], act, rng, dropout_rate=dropout))
    return Network(layers)


def alarm_loss(pred_real: np.ndarray, labels: np.ndarray,
               pred_generated: np.ndarray, lam: float) -> float:
    """BCE on real labels plus lambda-weighted BCE pinning counterexamples to 1."""
    real_term, _ = bce_loss(pred_real, labels)
    if lam == 0.0 or pred_generated.size == 0:
        return real_term
    gen_term, _ = bce_loss(pred_generated, np.ones_like(pred_generated))
    return real_term + lam * gen_term


class Detector:
    """Frozen target + trained alarm + anomaly generator, acting as one scorer."""

    def __init__(self, target: Network, alarm: Network,
                 generator: NoiseGenerator | VaeGenerator):
        if not target.frozen:
            raise ValueError("target must be frozen before it joins a detector")
        if alarm.in_dim != trace_width(target):
            raise ShapeError(
                f"alarm input width {alarm.in_dim} != target trace width {trace_width(target)}",
                expected=trace_width(target), actual=alarm.in_dim)
        self.target = target
        self.alarm = alarm
        self.generator = generator

    def detect(self, x: np.ndarray) -> np.ndarray:
        """Anomaly scores in [0, 1], one per row; higher = more anomalous."""
        return detect(self, x)


def detect(detector: Detector, x: np.ndarray) -> np.ndarray:
    features = trace_features(detector.target, x)
    scores, _ = detector.alarm.forward(features, mode="infer")
    return scores.ravel()


def train_alarm(detector: Detector, normal_data: np.ndarray, anomaly_data: np.ndarray,
                spec: AlarmSpec, seed: int = 0) -> list[float]:
    """Train the alarm on real labels plus generated counterexamples.

    Real anomalies (typically <= 100) are oversampled with replacement to
    ``spec.anomaly_fraction`` of each minibatch; each real minibatch is
    paired with an equally sized batch of generated samples. Only the alarm
    parameters move; returns per-epoch mean losses.
    """
    normal_data = ensure_finite("normal data", np.asarray(normal_data, dtype=np.float64))
    anomaly_data = np.asarray(anomaly_data, dtype=np.float64)
    if anomaly_data.size == 0:
        anomaly_data = anomaly_data.reshape(0, normal_data.shape[1])
    if normal_data.shape[0] == 0:
        raise ValueError("alarm training needs normal samples")
    if anomaly_data.shape[0] == 0 and isinstance(detector.generator, NoiseGenerator):
        warnings.warn("training with zero labeled anomalies and a noise generator; "
                      "only the counterexample term supervises the anomalous class")

    target_bytes_before = _parameter_bytes(detector.target)
    shuffle_rng = derive_rng(seed, "alarm-shuffle")
    oversample_rng = derive_rng(seed, "alarm-oversample")
    dropout_rng = derive_rng(seed, "alarm-dropout")
    adam = AdamState(detector.alarm.parameters(), lr=spec.lr)
    n_anoms = anomaly_data.shape[0]
    history = []

    # the target is frozen, so real-sample traces never change across epochs
    normal_feats = _traces_chunked(detector.target, normal_data)
    anomaly_feats = _traces_chunked(detector.target, anomaly_data) if n_anoms else None

    for _ in range(spec.epochs):
        losses = []
        for idx in batch_indices(normal_data.shape[0], spec.batch_size, shuffle_rng):
            batch_n = len(idx)
            k = int(round(spec.anomaly_fraction * batch_n)) if n_anoms else 0
            if k:
                picks = oversample_rng.integers(0, n_anoms, size=k)
                real = np.concatenate([normal_data[idx[:batch_n - k]], anomaly_data[picks]])
                real_feats = np.concatenate([normal_feats[idx[:batch_n - k]],
                                             anomaly_feats[picks]])
                labels = np.concatenate([np.zeros(batch_n - k), np.ones(k)]).reshape(-1, 1)
            else:
                real = normal_data[idx]
                real_feats = normal_feats[idx]
                labels = np.zeros((batch_n, 1))
            generated = detector.generator.generate(real)

            feats = np.concatenate([real_feats,
                                    trace_features(detector.target, generated)])
            pred, _ = detector.alarm.forward(feats, mode="train", rng=dropout_rng)
            pred_real, pred_gen = pred[:batch_n], pred[batch_n:]

            real_loss, real_grad = bce_loss(pred_real, labels)
            gen_loss, gen_grad = bce_loss(pred_gen, np.ones_like(pred_gen))
            loss = real_loss + spec.lam * gen_loss
            grad = np.concatenate([real_grad, spec.lam * gen_grad])
            if spec.shift_reg_weight > 0.0:
                # |1 - y| with y in (0, 1) is 1 - y: constant downward pull on the loss
                loss += spec.shift_reg_weight * float(np.mean(1.0 - pred_real))
                grad[:batch_n] -= spec.shift_reg_weight / pred_real.size

            grads, _ = detector.alarm.backprop(grad)
            adam.step(detector.alarm.parameters(), grads)
            losses.append(loss)
        history.append(float(np.mean(losses)))

    if _parameter_bytes(detector.target) != target_bytes_before:
        raise RuntimeError("frozen target parameters changed during alarm training")
    return history


def _parameter_bytes(net: Network) -> bytes:
    return b"".join(p.tobytes() for p in net.parameters())


def _traces_chunked(target: Network, x: np.ndarray, chunk: int = 2048) -> np.ndarray:
    parts = [trace_features(target, x[i:i + chunk]) for i in range(0, x.shape[0], chunk)]
    return np.concatenate(parts) if parts else np.zeros((0, trace_width(target)))
