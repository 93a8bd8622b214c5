"""Adam optimizer with bias correction."""

from __future__ import annotations

import numpy as np

from actalarm.util import ShapeError


class AdamState:
    """Per-parameter first/second moment accumulators plus the step counter.

    ``params`` is a flat list of arrays (as returned by
    ``Network.parameters``); ``step`` updates them in place.
    """

    def __init__(self, params: list[np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> list[np.ndarray]:
        """One Adam update. Mutates ``params`` in place and returns them."""
        if len(params) != len(self.m):
            raise ShapeError(f"got {len(params)} parameter arrays, state has {len(self.m)}",
                             expected=len(self.m), actual=len(params))
        if len(grads) != len(params):
            raise ShapeError(f"got {len(grads)} gradient arrays for {len(params)} parameters",
                             expected=len(params), actual=len(grads))
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for i, (p, g) in enumerate(zip(params, grads)):
            if p.shape != g.shape:
                raise ShapeError(f"gradient {i} shape {g.shape} != parameter shape {p.shape}",
                                 expected=p.shape, actual=g.shape, where=f"parameter {i}")
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * (g * g)
            m_hat = self.m[i] / b1t
            v_hat = self.v[i] / b2t
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
        return params
