"""Target construction presets and training behavior."""

import numpy as np
import pytest

from actalarm.nn import Activation
from actalarm.target import (
    TargetKind,
    TargetSpec,
    build_target,
    preset_spec,
    train_target,
)


class TestPresets:
    def test_nsl_kdd_preset_layer_widths(self):
        net = build_target(preset_spec("nsl-kdd", input_dim=122))
        assert [l.out_dim for l in net.layers] == [200, 100, 50, 25, 50, 100, 200, 122]

    def test_creditcard_preset_layer_widths(self):
        net = build_target(preset_spec("creditcard", input_dim=30))
        assert [l.out_dim for l in net.layers] == [50, 25, 10, 5, 10, 25, 50, 30]

    def test_mnist_classifier_final_width_is_ten(self):
        net = build_target(preset_spec("mnist-dense-clf", input_dim=784))
        assert net.layers[-1].out_dim == 10
        assert net.layers[-1].activation is Activation.LINEAR

    def test_unknown_preset_rejected(self):
        with pytest.raises(KeyError, match="unknown target preset"):
            preset_spec("resnet", input_dim=10)

    def test_empty_hidden_widths_rejected(self):
        with pytest.raises(ValueError, match="hidden_widths"):
            TargetSpec(kind=TargetKind.AUTOENCODER, hidden_widths=[], input_dim=4)

    def test_ae_output_is_sigmoid_of_input_dim(self):
        net = build_target(preset_spec("creditcard", input_dim=30))
        assert net.layers[-1].activation is Activation.SIGMOID
        assert net.out_dim == 30

    def test_dropout_sits_before_final_layer_only(self):
        net = build_target(preset_spec("nsl-kdd", input_dim=122))
        rates = [l.dropout_rate for l in net.layers]
        assert rates[-2] == 0.1
        assert all(r == 0.0 for r in rates[:-2] + rates[-1:])


class TestTraining:
    def test_constant_dataset_reaches_near_zero_mse(self):
        spec = TargetSpec(kind=TargetKind.AUTOENCODER, hidden_widths=[16, 8, 16], input_dim=6)
        net = build_target(spec, seed=1)
        row = np.full(6, 0.37)
        data = np.tile(row, (64, 1))
        history = train_target(net, spec, data, epochs=120, lr=0.01, batch_size=64, seed=1)
        assert history[-1] < 1e-3

    def test_loss_does_not_increase_over_training(self, rng):
        spec = TargetSpec(kind=TargetKind.AUTOENCODER, hidden_widths=[12, 6, 12], input_dim=8)
        net = build_target(spec, seed=2)
        data = rng.random((256, 8))
        history = train_target(net, spec, data, epochs=10, lr=0.005, seed=2)
        assert history[-1] <= history[0]

    def test_classifier_fits_separable_toy_data(self, rng):
        spec = TargetSpec(kind=TargetKind.CLASSIFIER, hidden_widths=[16, 8],
                          input_dim=2, n_classes=2)
        net = build_target(spec, seed=3)
        n = 200
        labels = rng.integers(0, 2, size=n)
        x = rng.standard_normal((n, 2)) * 0.3 + np.where(labels[:, None] == 1, 2.0, -2.0)
        train_target(net, spec, x, labels=labels, epochs=60, lr=0.01, seed=3)
        logits, _ = net.forward(x)
        accuracy = float(np.mean(logits.argmax(axis=1) == labels))
        assert accuracy > 0.95

    def test_empty_dataset_rejected(self):
        spec = TargetSpec(kind=TargetKind.AUTOENCODER, hidden_widths=[4], input_dim=3)
        net = build_target(spec)
        with pytest.raises(ValueError, match="empty"):
            train_target(net, spec, np.empty((0, 3)))

    def test_training_freezes_network(self, rng):
        spec = TargetSpec(kind=TargetKind.AUTOENCODER, hidden_widths=[4], input_dim=3)
        net = build_target(spec, seed=4)
        train_target(net, spec, rng.random((32, 3)), epochs=1, seed=4)
        assert net.frozen

    def test_ae_output_in_unit_interval(self, rng):
        spec = TargetSpec(kind=TargetKind.AUTOENCODER, hidden_widths=[10, 5, 10], input_dim=7)
        net = build_target(spec, seed=5)
        train_target(net, spec, rng.random((128, 7)), epochs=3, seed=5)
        out, _ = net.forward(rng.standard_normal((20, 7)) * 4)
        assert np.all(out >= 0.0) and np.all(out <= 1.0)

    def test_same_seed_trains_identical_parameters(self, rng):
        spec = TargetSpec(kind=TargetKind.AUTOENCODER, hidden_widths=[8, 4, 8], input_dim=5)
        data = rng.random((100, 5))
        net_a = build_target(spec, seed=9)
        net_b = build_target(spec, seed=9)
        train_target(net_a, spec, data, epochs=4, seed=9)
        train_target(net_b, spec, data, epochs=4, seed=9)
        for pa, pb in zip(net_a.parameters(), net_b.parameters()):
            np.testing.assert_array_equal(pa, pb)
