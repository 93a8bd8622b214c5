"""Semi-supervised anomaly detection from hidden-layer activations.

A frozen target network (autoencoder or classifier trained on normal data)
produces activation traces; an alarm network classifies those traces as
normal or anomalous, trained against a capped handful of labeled anomalies
plus synthetic counterexamples from an anomaly generator (Gaussian noise or
VAE latent perturbation).
"""

__version__ = "0.1.0"

from actalarm.alarm import AlarmSpec, Detector, build_alarm, detect, trace_features, train_alarm
from actalarm.baselines import IsolationForest, ae_score
from actalarm.bundle import load_bundle, save_bundle
from actalarm.generators import NoiseGenerator, NoiseGenSpec, VaeGenerator, VaeSpec, train_vae
from actalarm.metrics import average_precision, roc_auc, roc_points
from actalarm.report import MetricsReport, aggregate
from actalarm.runner import RunConfig, run, score
from actalarm.target import TargetKind, TargetSpec, build_target, preset_spec, train_target

__all__ = [
    "AlarmSpec",
    "Detector",
    "IsolationForest",
    "MetricsReport",
    "NoiseGenSpec",
    "NoiseGenerator",
    "RunConfig",
    "TargetKind",
    "TargetSpec",
    "VaeGenerator",
    "VaeSpec",
    "aggregate",
    "ae_score",
    "average_precision",
    "build_alarm",
    "build_target",
    "detect",
    "load_bundle",
    "preset_spec",
    "roc_auc",
    "roc_points",
    "run",
    "save_bundle",
    "score",
    "trace_features",
    "train_alarm",
    "train_target",
    "train_vae",
]
