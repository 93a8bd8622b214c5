"""Detector bundle archives: determinism and round-trip fidelity."""

import numpy as np
import pytest

from actalarm.alarm import AlarmSpec, Detector, build_alarm, detect, trace_width, train_alarm
from actalarm.bundle import bundle_to_bytes, load_bundle, save_bundle
from actalarm.generators import NoiseGenerator, NoiseGenSpec, VaeGenerator, VaeSpec, train_vae
from actalarm.target import TargetKind, TargetSpec, build_target, train_target


@pytest.fixture(scope="module")
def trained():
    rng = np.random.default_rng(0)
    normal = np.clip(0.3 + 0.1 * rng.standard_normal((300, 8)), 0, 1)
    anoms = np.clip(0.8 + 0.05 * rng.standard_normal((20, 8)), 0, 1)
    spec = TargetSpec(kind=TargetKind.AUTOENCODER, hidden_widths=[12, 4, 12], input_dim=8)
    target = build_target(spec, seed=0)
    train_target(target, spec, normal, epochs=3, seed=0)
    alarm_spec = AlarmSpec(hidden_widths=[16], lr=1e-3, epochs=2, batch_size=64)
    alarm = build_alarm(trace_width(target), alarm_spec, seed=0)
    detector = Detector(target, alarm, NoiseGenerator(NoiseGenSpec(), seed=0))
    train_alarm(detector, normal, anoms, alarm_spec, seed=0)
    return detector, normal


PREPROCESSING = {"kind": "image", "rows": 2, "cols": 4, "pixel_scale": 255}


class TestBundleBytes:
    def test_identical_detectors_produce_identical_bytes(self, trained):
        detector, _ = trained
        assert bundle_to_bytes(detector, PREPROCESSING) == \
            bundle_to_bytes(detector, PREPROCESSING)

    def test_round_trip_preserves_scores(self, trained, tmp_path):
        detector, normal = trained
        path = tmp_path / "d.bundle"
        save_bundle(detector, PREPROCESSING, path, manifest_extra={"scenario": "t"})
        restored, manifest = load_bundle(path)
        assert manifest["scenario"] == "t"
        assert manifest["preprocessing"] == PREPROCESSING
        np.testing.assert_array_equal(detect(restored, normal[:10]),
                                      detect(detector, normal[:10]))

    def test_restored_target_is_frozen(self, trained, tmp_path):
        detector, _ = trained
        path = tmp_path / "d.bundle"
        save_bundle(detector, PREPROCESSING, path)
        restored, _ = load_bundle(path)
        assert restored.target.frozen


class TestVaeBundle:
    def test_vae_generator_round_trips(self, tmp_path):
        rng = np.random.default_rng(1)
        normal = np.clip(0.4 + 0.1 * rng.standard_normal((200, 10)), 0, 1)
        spec = TargetSpec(kind=TargetKind.AUTOENCODER, hidden_widths=[8, 4, 8], input_dim=10)
        target = build_target(spec, seed=1)
        train_target(target, spec, normal, epochs=2, seed=1)
        vae, _ = train_vae(normal, VaeSpec(hidden_widths=[16, 8, 4, 8, 16], epochs=3,
                                           lr=0.005, batch_size=64), seed=1)
        alarm_spec = AlarmSpec(hidden_widths=[16], lr=1e-3, epochs=1, batch_size=64)
        alarm = build_alarm(trace_width(target), alarm_spec, seed=1)
        detector = Detector(target, alarm, VaeGenerator(vae, seed=1))
        train_alarm(detector, normal, np.empty((0, 10)), alarm_spec, seed=1)

        path = tmp_path / "vae.bundle"
        save_bundle(detector, PREPROCESSING, path)
        restored, manifest = load_bundle(path)
        assert manifest["generator"]["kind"] == "vae"
        np.testing.assert_array_equal(
            restored.generator.vae.reconstruct(normal[:5]),
            vae.reconstruct(normal[:5]))
        np.testing.assert_array_equal(detect(restored, normal[:5]),
                                      detect(detector, normal[:5]))
