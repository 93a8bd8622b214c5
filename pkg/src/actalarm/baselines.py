"""Reference scorers: autoencoder reconstruction error and Isolation Forest."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from actalarm.nn import Network
from actalarm.util import NotTrainedError, ensure_finite

EULER_GAMMA = 0.5772156649


def ae_score(target_ae: Network, x: np.ndarray) -> np.ndarray:
    """Per-sample squared reconstruction error ||x_hat - x||^2; higher = more anomalous.

    Only defined for autoencoder targets (output width equal to input width).
    """
    if target_ae.out_dim != target_ae.in_dim:
        raise ValueError(
            f"reconstruction baseline needs an autoencoder target; this network maps "
            f"{target_ae.in_dim} -> {target_ae.out_dim}")
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    recon, _ = target_ae.forward(x, mode="infer")
    diff = recon - x
    return np.sum(diff * diff, axis=1)


def harmonic(n: int) -> float:
    """H(n) approximated as ln(n) + Euler-Mascheroni constant."""
    return math.log(n) + EULER_GAMMA


def path_length_norm(n: int) -> float:
    """Average unsuccessful-search path length c(n) of a binary search tree.

    c(n) = 2 H(n-1) - 2 (n-1) / n; 0 for n <= 1 and 1 for n == 2.
    """
    if n <= 1:
        return 0.0
    if n == 2:
        return 1.0
    return 2.0 * harmonic(n - 1) - 2.0 * (n - 1) / n


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None
    size: int = 0  # samples in an external node

    @property
    def is_leaf(self) -> bool:
        return self.left is None


class IsolationForest:
    """Ensemble of random isolation trees; short average paths flag anomalies.

    Default parameters (100 trees, subsample 256, height limit
    ceil(log2(subsample))) follow the original algorithm. Per-tree seeds are
    derived from the fit seed so tree construction order never matters.
    """

    def __init__(self, n_trees: int = 100, subsample: int = 256):
        if n_trees < 1 or subsample < 2:
            raise ValueError(f"need n_trees >= 1 and subsample >= 2, "
                             f"got {n_trees}, {subsample}")
        self.n_trees = n_trees
        self.subsample = subsample
        self.trees: list[_Node] = []
        self._psi = 0

    def fit(self, data: np.ndarray, seed: int = 0) -> "IsolationForest":
        data = ensure_finite("isolation forest data", np.asarray(data, dtype=np.float64))
        if data.ndim != 2 or data.shape[0] == 0:
            raise ValueError(f"expected a non-empty 2-D array, got shape {data.shape}")
        n = data.shape[0]
        self._psi = min(self.subsample, n)
        height_limit = math.ceil(math.log2(self._psi))
        self.trees = []
        for ss in np.random.SeedSequence(seed).spawn(self.n_trees):
            rng = np.random.default_rng(ss)
            idx = rng.choice(n, size=self._psi, replace=False)
            self.trees.append(self._build(data[idx], 0, height_limit, rng))
        return self

    def _build(self, data: np.ndarray, depth: int, limit: int,
               rng: np.random.Generator) -> _Node:
        n = data.shape[0]
        if n <= 1 or depth >= limit:
            return _Node(size=n)
        lo = data.min(axis=0)
        hi = data.max(axis=0)
        candidates = np.nonzero(hi > lo)[0]  # constant features cannot split
        if candidates.size == 0:
            return _Node(size=n)
        feature = int(rng.choice(candidates))
        threshold = float(rng.uniform(lo[feature], hi[feature]))
        go_left = data[:, feature] < threshold
        return _Node(
            feature=feature,
            threshold=threshold,
            left=self._build(data[go_left], depth + 1, limit, rng),
            right=self._build(data[~go_left], depth + 1, limit, rng),
        )

    def _path_length(self, row: np.ndarray, node: _Node) -> float:
        depth = 0.0
        while not node.is_leaf:
            node = node.left if row[node.feature] < node.threshold else node.right
            depth += 1.0
        return depth + path_length_norm(node.size)  # unsplit leaves credit c(m)

    def score(self, x: np.ndarray) -> np.ndarray:
        """Anomaly score s = 2^(-E[h(x)] / c(psi)) in (0, 1); higher = more anomalous."""
        if not self.trees:
            raise NotTrainedError("isolation forest scored before fit")
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        mean_depth = np.zeros(x.shape[0])
        for tree in self.trees:
            mean_depth += np.fromiter((self._path_length(row, tree) for row in x),
                                      dtype=np.float64, count=x.shape[0])
        mean_depth /= len(self.trees)
        return np.power(2.0, -mean_depth / path_length_norm(self._psi))

    def max_depth(self) -> int:
        """Deepest internal path over all trees (leaves sit one past it)."""
        def depth(node: _Node) -> int:
            if node.is_leaf:
                return 0
            return 1 + max(depth(node.left), depth(node.right))
        return max(depth(t) for t in self.trees)
