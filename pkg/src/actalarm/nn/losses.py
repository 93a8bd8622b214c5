"""Loss functions. Each returns (batch-mean scalar, gradient w.r.t. predictions)."""

from __future__ import annotations

import numpy as np

from actalarm.util import ShapeError

# clamp for log() stability; predictions are clipped into [EPS, 1-EPS]
BCE_EPS = 1e-7


def _check_shapes(pred: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError(f"prediction shape {pred.shape} != target shape {target.shape}",
                         expected=target.shape, actual=pred.shape)
    return pred, target


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error over all entries."""
    pred, target = _check_shapes(pred, target)
    diff = pred - target
    loss = float(np.mean(diff * diff))
    grad = 2.0 * diff / diff.size
    return loss, grad


def bce_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Binary cross-entropy, mean over all entries.

    Predictions are clamped to [1e-7, 1 - 1e-7] before the log, both in the
    value and in the gradient denominator.
    """
    pred, target = _check_shapes(pred, target)
    p = np.clip(pred, BCE_EPS, 1.0 - BCE_EPS)
    loss = float(-np.mean(target * np.log(p) + (1.0 - target) * np.log(1.0 - p)))
    grad = (p - target) / (p * (1.0 - p)) / p.size
    return loss, grad


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Multi-class cross-entropy on raw logits via a stable log-sum-exp.

    ``labels`` are integer class indices, one per row. Gradient is w.r.t.
    the logits.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    n = logits.shape[0]
    if labels.shape != (n,):
        raise ShapeError(f"labels shape {labels.shape} != ({n},)",
                         expected=(n,), actual=labels.shape)
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    loss = float(np.mean(lse - shifted[np.arange(n), labels]))
    softmax = np.exp(shifted)
    softmax /= softmax.sum(axis=1, keepdims=True)
    grad = softmax
    grad[np.arange(n), labels] -= 1.0
    grad /= n
    return loss, grad
