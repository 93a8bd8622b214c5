"""The in-memory dataset: scaled features, integer labels, class names."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from actalarm.util import ensure_finite


@dataclass
class Dataset:
    """Feature matrix plus labels.

    ``x`` is (n, d) float64 with all features in [0, 1] after preprocessing;
    ``y`` holds integer codes into ``classes``; ``meta`` carries whatever the
    loader needs to replay preprocessing on new data.
    """

    x: np.ndarray
    y: np.ndarray
    classes: list[str]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = ensure_finite("dataset features", np.asarray(self.x, dtype=np.float64))
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.x.shape[0] != self.y.shape[0]:
            raise ValueError(f"{self.x.shape[0]} feature rows vs {self.y.shape[0]} labels")

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def class_codes(self, names: list[str]) -> np.ndarray:
        missing = [n for n in names if n not in self.classes]
        if missing:
            raise KeyError(f"classes {missing} not present; available: {self.classes}")
        return np.array([self.classes.index(n) for n in names])

    def take(self, indices: np.ndarray) -> "Dataset":
        return Dataset(x=self.x[indices], y=self.y[indices],
                       classes=self.classes, meta=self.meta)

    @staticmethod
    def merge(a: "Dataset", b: "Dataset") -> "Dataset":
        """Stack two datasets with disjoint class-name spaces (e.g. digits + letters)."""
        if a.dim != b.dim:
            raise ValueError(f"feature dims differ: {a.dim} vs {b.dim}")
        overlap = set(a.classes) & set(b.classes)
        if overlap:
            raise ValueError(f"class names overlap: {sorted(overlap)}")
        classes = a.classes + b.classes
        y_b = b.y + len(a.classes)
        return Dataset(x=np.vstack([a.x, b.x]), y=np.concatenate([a.y, y_b]),
                       classes=classes, meta=dict(a.meta))
