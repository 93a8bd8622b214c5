"""Backprop against analytic cases and a central finite-difference oracle."""

import numpy as np
import pytest

from actalarm.nn import Activation, DenseLayer, Network
from actalarm.util import NotTrainedError

FD_STEP = 1e-5


def finite_difference_grads(net, x, coeffs, step=FD_STEP):
    """Central finite differences of L = sum(coeffs * forward(x)) w.r.t. every parameter.

    Independent oracle: only uses infer-mode forward evaluations.
    """
    grads = []
    for p in net.parameters():
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = p[idx]
            p[idx] = orig + step
            up = float(np.sum(coeffs * net.forward(x)[0]))
            p[idx] = orig - step
            down = float(np.sum(coeffs * net.forward(x)[0]))
            p[idx] = orig
            g[idx] = (up - down) / (2 * step)
        grads.append(g)
    return grads


def assert_grads_close(analytic, numeric, rel_tol=1e-4):
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-6)
        rel = np.abs(a - n) / denom
        assert rel.max() < rel_tol, f"max relative error {rel.max():.3g}"


class TestAnalyticCases:
    def test_scalar_linear_chain_rule(self):
        # L = 0.5 * (w*x - y)^2 with w=2, x=1, y=0  =>  dL/dw = (w*x - y) * x = 2
        net = Network([DenseLayer(weights=np.array([[2.0]]), bias=np.array([0.0]),
                                  activation=Activation.LINEAR)])
        out, _ = net.forward(np.array([[1.0]]), mode="train")
        grad_out = out - np.array([[0.0]])
        grads, _ = net.backprop(grad_out)
        np.testing.assert_allclose(grads[0], [[2.0]], atol=1e-14)
        np.testing.assert_allclose(grads[1], [2.0], atol=1e-14)

    def test_zero_upstream_gradient_gives_zero_grads(self, rng):
        layers = [DenseLayer.create(4, 6, Activation.RELU, rng),
                  DenseLayer.create(6, 3, Activation.SIGMOID, rng)]
        net = Network(layers)
        out, _ = net.forward(rng.standard_normal((5, 4)), mode="train")
        grads, grad_in = net.backprop(np.zeros_like(out))
        for g in grads:
            assert np.all(g == 0.0)
        assert np.all(grad_in == 0.0)

    def test_backprop_without_forward_raises(self, rng):
        net = Network([DenseLayer.create(3, 2, Activation.LINEAR, rng)])
        with pytest.raises(NotTrainedError):
            net.backprop(np.zeros((1, 2)))

    def test_backprop_does_not_mutate_parameters(self, rng):
        net = Network([DenseLayer.create(3, 2, Activation.SIGMOID, rng)])
        before = [p.copy() for p in net.parameters()]
        out, _ = net.forward(rng.standard_normal((4, 3)), mode="train")
        net.backprop(np.ones_like(out))
        for b, p in zip(before, net.parameters()):
            np.testing.assert_array_equal(b, p)


class TestFiniteDifferenceOracle:
    @pytest.mark.parametrize("acts", [
        (Activation.LINEAR,),
        (Activation.RELU,),
        (Activation.SIGMOID,),
        (Activation.RELU, Activation.SIGMOID),
        (Activation.SIGMOID, Activation.RELU, Activation.LINEAR),
    ])
    def test_random_nets_match_central_differences(self, acts):
        rng = np.random.default_rng(7)
        for instance in range(5):
            widths = [int(w) for w in rng.integers(2, 9, size=len(acts) + 1)]
            layers = [DenseLayer.create(widths[i], widths[i + 1], acts[i], rng)
                      for i in range(len(acts))]
            net = Network(layers)
            x = rng.standard_normal((3, widths[0]))
            coeffs = rng.standard_normal((3, widths[-1]))

            out, _ = net.forward(x, mode="train")
            analytic, _ = net.backprop(coeffs)
            numeric = finite_difference_grads(net, x, coeffs)
            assert_grads_close(analytic, numeric)

    def test_grad_input_matches_central_differences(self):
        rng = np.random.default_rng(11)
        net = Network([DenseLayer.create(4, 6, Activation.SIGMOID, rng),
                       DenseLayer.create(6, 2, Activation.LINEAR, rng)])
        x = rng.standard_normal((2, 4))
        coeffs = rng.standard_normal((2, 2))
        out, _ = net.forward(x, mode="train")
        _, grad_in = net.backprop(coeffs)

        numeric = np.zeros_like(x)
        for i in range(x.shape[0]):
            for j in range(x.shape[1]):
                orig = x[i, j]
                x[i, j] = orig + FD_STEP
                up = float(np.sum(coeffs * net.forward(x)[0]))
                x[i, j] = orig - FD_STEP
                down = float(np.sum(coeffs * net.forward(x)[0]))
                x[i, j] = orig
                numeric[i, j] = (up - down) / (2 * FD_STEP)
        assert_grads_close([grad_in], [numeric])

    def test_dropout_gradients_respect_mask(self):
        # with a fixed dropout mask the surviving path's gradient doubles (p=0.5)
        rng = np.random.default_rng(3)
        net = Network([DenseLayer(weights=np.eye(2), bias=np.zeros(2),
                                  activation=Activation.LINEAR, dropout_rate=0.5)])
        x = np.ones((1, 2))
        out, _ = net.forward(x, mode="train", rng=np.random.default_rng(12))
        grads, _ = net.backprop(np.ones_like(out))
        # each diagonal weight's gradient is either 0 (dropped) or 2 (kept, scaled by 1/0.5)
        diag = np.diag(grads[0])
        assert set(np.round(diag, 12).tolist()) <= {0.0, 2.0}
        np.testing.assert_allclose(np.diag(grads[0]), out.ravel())
