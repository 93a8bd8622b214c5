"""Threshold-free detection metrics: ROC AUC, average precision, ROC curves.

All functions take a score vector (higher = more anomalous) and binary
labels (1 = anomalous) and are pure.
"""

from __future__ import annotations

import numpy as np

from actalarm.util import ShapeError


def _validate(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise ShapeError(f"scores shape {scores.shape} != labels shape {labels.shape}",
                         expected=labels.shape, actual=scores.shape)
    uniq = set(np.unique(labels).tolist())
    if not uniq <= {0, 1}:
        raise ValueError(f"labels must be binary 0/1, got values {sorted(uniq)}")
    if uniq != {0, 1}:
        raise ValueError("both classes must be present to compute ranking metrics")
    return scores, labels.astype(np.int64)


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned their group average."""
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores), dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def roc_auc(scores, labels) -> float:
    """Area under the ROC curve via the rank statistic.

    Equals the probability that a random anomaly outscores a random normal
    sample; tied pairs count 0.5.
    """
    scores, labels = _validate(scores, labels)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    ranks = _average_ranks(scores)
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _threshold_counts(scores: np.ndarray, labels: np.ndarray):
    """Cumulative TP/FP after each distinct descending score threshold."""
    order = np.argsort(-scores, kind="mergesort")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    tp = np.cumsum(sorted_labels)
    fp = np.cumsum(1 - sorted_labels)
    # keep the last index of each tied group
    last = np.nonzero(np.diff(sorted_scores, append=np.nan))[0]
    return tp[last], fp[last]


def average_precision(scores, labels) -> float:
    """AP = sum over descending thresholds of (R_k - R_{k-1}) * P_k, no interpolation."""
    scores, labels = _validate(scores, labels)
    n_pos = int(labels.sum())
    tp, fp = _threshold_counts(scores, labels)
    recall = tp / n_pos
    precision = tp / (tp + fp)
    prev_recall = np.concatenate([[0.0], recall[:-1]])
    return float(np.sum((recall - prev_recall) * precision))


def roc_points(scores, labels) -> list[tuple[float, float]]:
    """ROC curve as (FPR, TPR) points, one per distinct threshold plus (0, 0).

    The trapezoid integral of these points equals :func:`roc_auc` exactly
    (tied scores collapse into single curve vertices).
    """
    scores, labels = _validate(scores, labels)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    tp, fp = _threshold_counts(scores, labels)
    points = [(0.0, 0.0)]
    points.extend((float(f) / n_neg, float(t) / n_pos) for f, t in zip(fp, tp))
    return points


def trapezoid_area(points: list[tuple[float, float]]) -> float:
    """Area under a piecewise-linear curve given as (x, y) points."""
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points[:-1], points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area
