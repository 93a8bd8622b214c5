"""Loss values against hand arithmetic and gradients against finite differences."""

import math

import numpy as np
import pytest

from actalarm.nn import bce_loss, mse_loss, softmax_cross_entropy
from actalarm.util import ShapeError


def fd_loss_grad(fn, pred, step=1e-6):
    """Central-difference gradient of a scalar loss w.r.t. predictions."""
    grad = np.zeros_like(pred)
    it = np.nditer(pred, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = pred[idx]
        pred[idx] = orig + step
        up = fn(pred)
        pred[idx] = orig - step
        down = fn(pred)
        pred[idx] = orig
        grad[idx] = (up - down) / (2 * step)
    return grad


class TestMse:
    def test_perfect_reconstruction_is_zero(self):
        loss, grad = mse_loss(np.array([1.0, 1.0]), np.array([1.0, 1.0]))
        assert loss == 0.0
        np.testing.assert_array_equal(grad, [0.0, 0.0])

    def test_hand_arithmetic(self):
        loss, _ = mse_loss(np.array([0.0, 2.0]), np.array([1.0, 0.0]))
        assert loss == pytest.approx(2.5, abs=1e-12)

    def test_gradient_matches_finite_differences(self, rng):
        pred = rng.standard_normal((4, 3))
        target = rng.standard_normal((4, 3))
        _, grad = mse_loss(pred, target)
        numeric = fd_loss_grad(lambda p: mse_loss(p, target)[0], pred)
        np.testing.assert_allclose(grad, numeric, atol=1e-8)


class TestBce:
    def test_half_confidence_is_ln2(self):
        loss, _ = bce_loss(np.array([0.5]), np.array([1.0]))
        assert loss == pytest.approx(math.log(2), abs=1e-12)

    def test_clamping_keeps_extreme_predictions_finite(self):
        loss, grad = bce_loss(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
        assert np.isfinite(loss)
        assert np.all(np.isfinite(grad))
        assert loss < 1e-6

    def test_gradient_matches_finite_differences(self, rng):
        pred = rng.uniform(0.05, 0.95, size=(5, 2))
        target = (rng.random((5, 2)) > 0.5).astype(float)
        _, grad = bce_loss(pred, target)
        numeric = fd_loss_grad(lambda p: bce_loss(p, target)[0], pred)
        np.testing.assert_allclose(grad, numeric, atol=1e-6)

    def test_shape_mismatch_raises(self):
        with pytest.raises(ShapeError):
            bce_loss(np.zeros(3), np.zeros(4))


class TestSoftmaxCrossEntropy:
    def test_uniform_logits_give_log_n_classes(self):
        loss, _ = softmax_cross_entropy(np.zeros((2, 4)), np.array([0, 3]))
        assert loss == pytest.approx(math.log(4), abs=1e-12)

    def test_large_logits_stay_stable(self):
        loss, grad = softmax_cross_entropy(np.array([[1000.0, 0.0], [0.0, 1000.0]]),
                                           np.array([0, 1]))
        assert np.isfinite(loss) and loss < 1e-9
        assert np.all(np.isfinite(grad))

    def test_gradient_matches_finite_differences(self, rng):
        logits = rng.standard_normal((6, 5))
        labels = rng.integers(0, 5, size=6)
        _, grad = softmax_cross_entropy(logits, labels)
        numeric = fd_loss_grad(lambda lg: softmax_cross_entropy(lg, labels)[0], logits)
        np.testing.assert_allclose(grad, numeric, atol=1e-7)
