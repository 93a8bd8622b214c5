"""Shared plumbing: seeded RNG derivation, finiteness checks, error types."""

from __future__ import annotations

import zlib
from typing import Iterator

import numpy as np


class ShapeError(ValueError):
    """Raised when an array does not match the shape a component expects.

    Carries enough context to point at the offending layer/column instead of
    a bare dimension pair.
    """

    def __init__(self, message: str, *, expected=None, actual=None, where: str | None = None):
        super().__init__(message)
        self.expected = expected
        self.actual = actual
        self.where = where


class NotTrainedError(RuntimeError):
    """Raised when inference or backprop is requested before the required fit/forward."""


def ensure_finite(name: str, arr: np.ndarray) -> np.ndarray:
    """Reject NaN/Inf entries. Public pipeline boundaries call this."""
    if not np.all(np.isfinite(arr)):
        bad = int(np.size(arr) - np.count_nonzero(np.isfinite(arr)))
        raise ValueError(f"{name} contains {bad} non-finite entries")
    return arr


def derive_rng(seed: int, *tags: str | int) -> np.random.Generator:
    """Deterministic per-role RNG.

    Every stochastic component of a run (weight init, shuffling, noise draws,
    per-tree seeds, ...) derives its own stream from the master seed plus a
    role tag, so adding a consumer never shifts another consumer's stream.
    """
    words = [np.uint32(seed & 0xFFFFFFFF), np.uint32((seed >> 32) & 0xFFFFFFFF)]
    for tag in tags:
        if isinstance(tag, int):
            words.append(np.uint32(tag & 0xFFFFFFFF))
        else:
            words.append(np.uint32(zlib.crc32(tag.encode("utf-8"))))
    return np.random.default_rng(np.random.SeedSequence([int(w) for w in words]))


def batch_indices(n: int, batch_size: int, rng: np.random.Generator | None = None) -> Iterator[np.ndarray]:
    """Yield minibatch index arrays covering 0..n-1, shuffled when an RNG is given."""
    order = np.arange(n) if rng is None else rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]
