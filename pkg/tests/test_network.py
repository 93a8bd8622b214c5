"""Forward pass, activation capture, dropout and serialization of the dense engine."""

import numpy as np
import pytest

from actalarm.nn import (
    Activation,
    DenseLayer,
    Network,
    network_from_bytes,
    network_to_bytes,
)
from actalarm.util import ShapeError


def matmul_oracle(a, b):
    """Naive triple-loop matrix multiply; deliberately independent of numpy's dot."""
    n, k = a.shape
    k2, m = b.shape
    assert k == k2
    out = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            s = 0.0
            for t in range(k):
                s += a[i, t] * b[t, j]
            out[i, j] = s
    return out


def single_layer(weights, bias, activation, dropout=0.0):
    return Network([DenseLayer(weights=np.asarray(weights, dtype=float),
                               bias=np.asarray(bias, dtype=float),
                               activation=activation, dropout_rate=dropout)])


def random_net(widths, activations, rng, dropout=0.0):
    layers = []
    for i in range(len(widths) - 1):
        act = activations[i % len(activations)]
        layers.append(DenseLayer.create(widths[i], widths[i + 1], act, rng,
                                        dropout_rate=dropout if i == len(widths) - 2 else 0.0))
    return Network(layers)


class TestForward:
    def test_identity_linear_layer(self):
        net = single_layer(np.eye(2), [0, 0], Activation.LINEAR)
        out, _ = net.forward(np.array([[1.0, 2.0]]))
        np.testing.assert_array_equal(out, [[1.0, 2.0]])

    def test_relu_clamps_negatives(self):
        net = single_layer(np.eye(2), [0, 0], Activation.RELU)
        out, _ = net.forward(np.array([[-1.0, 2.0]]))
        np.testing.assert_array_equal(out, [[0.0, 2.0]])

    def test_two_layer_matches_triple_loop_oracle(self, rng):
        net = random_net([5, 7, 3], [Activation.LINEAR], rng)
        x = rng.standard_normal((4, 5))
        out, _ = net.forward(x)

        h1 = matmul_oracle(x, net.layers[0].weights.T) + net.layers[0].bias
        h2 = matmul_oracle(h1, net.layers[1].weights.T) + net.layers[1].bias
        np.testing.assert_allclose(out, h2, atol=1e-12, rtol=0)

    def test_dimension_mismatch_names_layer_and_dims(self):
        net = single_layer(np.eye(3), [0, 0, 0], Activation.LINEAR)
        with pytest.raises(ShapeError) as exc:
            net.forward(np.ones((2, 4)))
        assert exc.value.expected == 3
        assert exc.value.actual == 4
        assert "layer 0" in str(exc.value)

    def test_forward_deterministic(self, rng):
        net = random_net([6, 8, 4, 2], [Activation.RELU, Activation.SIGMOID], rng)
        x = rng.standard_normal((10, 6))
        a, _ = net.forward(x)
        b, _ = net.forward(x)
        np.testing.assert_array_equal(a, b)


class TestTrace:
    def test_trace_excludes_input_and_output(self, rng):
        net = random_net([5, 9, 7, 3], [Activation.RELU], rng)
        x = rng.standard_normal((4, 5))
        out, trace = net.forward(x)
        assert len(trace.layers) == 2
        assert [h.shape for h in trace.layers] == [(4, 9), (4, 7)]
        assert trace.width == 16
        assert trace.concat().shape == (4, 16)

    @pytest.mark.parametrize("widths", [
        [122, 200, 100, 50, 25, 50, 100, 200, 122],   # tabular AE preset + output
        [30, 50, 25, 10, 5, 10, 25, 50, 30],          # small tabular AE preset
        [784, 512, 256, 64, 256, 512, 784],           # dense image AE substitute
        [784, 512, 256, 128, 10],                     # dense image classifier substitute
        [1600, 1000, 500, 200, 75, 1],                # alarm architecture
    ])
    def test_trace_width_is_sum_of_hidden_widths(self, widths, rng):
        net = random_net(widths, [Activation.RELU], rng)
        x = rng.standard_normal((2, widths[0]))
        _, trace = net.forward(x)
        assert trace.width == sum(widths[1:-1])


class TestDropout:
    def test_infer_mode_is_identity(self, rng):
        weights = rng.standard_normal((4, 4))
        plain = single_layer(weights, np.zeros(4), Activation.RELU, dropout=0.0)
        dropped = single_layer(weights, np.zeros(4), Activation.RELU, dropout=0.1)
        x = rng.standard_normal((6, 4))
        np.testing.assert_array_equal(plain.forward(x, mode="infer")[0],
                                      dropped.forward(x, mode="infer")[0])

    def test_train_mode_drops_and_rescales(self, rng):
        net = single_layer(np.eye(50), np.zeros(50), Activation.LINEAR, dropout=0.5)
        x = np.ones((200, 50))
        out, _ = net.forward(x, mode="train", rng=np.random.default_rng(0))
        vals = np.unique(out)
        assert set(vals.tolist()) == {0.0, 2.0}  # inverted dropout: kept units scaled by 1/(1-p)
        assert abs(np.mean(out == 0.0) - 0.5) < 0.02

    def test_train_mode_without_rng_raises(self):
        net = single_layer(np.eye(2), np.zeros(2), Activation.LINEAR, dropout=0.1)
        with pytest.raises(ValueError, match="rng"):
            net.forward(np.ones((1, 2)), mode="train")


class TestActivationRanges:
    def test_relu_nonnegative_sigmoid_in_unit_interval(self, rng):
        # float64 sigmoid saturates to exactly 0/1 for |z| > ~37; test within
        # the representable range (losses clamp saturated outputs anyway)
        x = rng.standard_normal((50, 10))
        relu_net = single_layer(rng.standard_normal((8, 10)), np.zeros(8), Activation.RELU)
        sig_net = single_layer(rng.standard_normal((8, 10)), np.zeros(8), Activation.SIGMOID)
        relu_out, _ = relu_net.forward(x * 20)
        sig_out, _ = sig_net.forward(x)
        assert np.all(relu_out >= 0)
        assert np.all(sig_out > 0) and np.all(sig_out < 1)


class TestChainValidation:
    def test_mismatched_adjacent_dims_rejected(self, rng):
        l1 = DenseLayer.create(4, 5, Activation.RELU, rng)
        l2 = DenseLayer.create(6, 2, Activation.RELU, rng)
        with pytest.raises(ShapeError, match="layer 0"):
            Network([l1, l2])


class TestSerialization:
    def test_round_trip_is_bit_exact(self, rng):
        net = random_net([7, 13, 5, 2], [Activation.RELU, Activation.SIGMOID, Activation.LINEAR],
                         rng, dropout=0.1)
        blob = network_to_bytes(net)
        restored = network_from_bytes(blob)
        assert network_to_bytes(restored) == blob
        for a, b in zip(net.parameters(), restored.parameters()):
            assert a.tobytes() == b.tobytes()
        for la, lb in zip(net.layers, restored.layers):
            assert la.activation == lb.activation
            assert la.dropout_rate == lb.dropout_rate

    def test_bad_magic_rejected(self):
        with pytest.raises(ValueError, match="magic"):
            network_from_bytes(b"NOTANET0" + b"\x00" * 32)

    def test_truncated_blob_rejected(self, rng):
        net = random_net([3, 4, 2], [Activation.RELU], rng)
        blob = network_to_bytes(net)
        with pytest.raises(ValueError, match="truncated"):
            network_from_bytes(blob[:-8])
