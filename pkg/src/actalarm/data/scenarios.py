"""Experiment scenarios: stratified splits, class filtering, anomaly budgets.

Each scenario names a normal class set, the anomaly classes visible during
training, and the (super)set used at test time. The capped anomaly draw is
seeded and always a subset of the training partition.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from actalarm.data.dataset import Dataset
from actalarm.util import derive_rng

DIGITS = [str(d) for d in range(10)]
LETTERS_AE = ["A", "B", "C", "D", "E"]
LETTERS_VZ = ["V", "W", "X", "Y", "Z"]


@dataclass
class ExperimentScenario:
    id: str
    dataset: str                      # "mnist", "mnist+emnist", "nsl-kdd", "creditcard"
    normal_classes: list[str]
    train_anomaly_classes: list[str]
    test_anomaly_classes: list[str]
    anomaly_budget: int = 100
    seed: int = 0
    generator: str = "noise"          # "noise" or "vae"
    target_preset: str = "mnist-dense-ae"

    def __post_init__(self):
        if not set(self.train_anomaly_classes) <= set(self.test_anomaly_classes):
            raise ValueError(
                f"scenario {self.id}: train anomaly classes "
                f"{self.train_anomaly_classes} must be a subset of test anomaly "
                f"classes {self.test_anomaly_classes}")
        if self.anomaly_budget < 0:
            raise ValueError(f"scenario {self.id}: negative anomaly budget")
        if set(self.normal_classes) & set(self.test_anomaly_classes):
            raise ValueError(f"scenario {self.id}: normal and anomaly classes overlap")


def _row(dataset, normal, train_anom, test_anom, generator, preset, budget=100):
    return {"dataset": dataset, "normal_classes": normal,
            "train_anomaly_classes": train_anom, "test_anomaly_classes": test_anom,
            "generator": generator, "target_preset": preset, "anomaly_budget": budget}


# Known-anomaly detection (1x), transferability (2x), classifier targets on
# merged digits+letters (3x), and the generative zero-label outlook (4x).
SCENARIOS: dict[str, dict] = {
    "1a": _row("mnist", DIGITS[:6], ["6", "7"], ["6", "7"], "noise", "mnist-dense-ae"),
    "1b": _row("mnist", DIGITS[4:], ["0", "1"], ["0", "1"], "noise", "mnist-dense-ae"),
    "1c": _row("nsl-kdd", ["normal"], ["DoS", "Probe"], ["DoS", "Probe"], "noise", "nsl-kdd"),
    "1d": _row("nsl-kdd", ["normal"], ["R2L", "U2R"], ["R2L", "U2R"], "noise", "nsl-kdd"),
    "1g": _row("creditcard", ["normal"], ["fraud"], ["fraud"], "noise", "creditcard"),
    "2a": _row("mnist", DIGITS[:6], ["6", "7"], ["6", "7", "8", "9"], "noise", "mnist-dense-ae"),
    "2b": _row("mnist", DIGITS[4:], ["0", "1"], ["0", "1", "2", "3"], "noise", "mnist-dense-ae"),
    "2c": _row("nsl-kdd", ["normal"], ["DoS", "Probe"],
               ["DoS", "Probe", "R2L", "U2R"], "noise", "nsl-kdd"),
    "2d": _row("nsl-kdd", ["normal"], ["R2L", "U2R"],
               ["R2L", "U2R", "DoS", "Probe"], "noise", "nsl-kdd"),
    "3a": _row("mnist+emnist", DIGITS, LETTERS_AE, LETTERS_AE, "noise", "mnist-dense-clf"),
    "3b": _row("mnist+emnist", DIGITS, LETTERS_AE, LETTERS_AE + LETTERS_VZ,
               "noise", "mnist-dense-clf"),
    "3c": _row("mnist+emnist", DIGITS, LETTERS_VZ, LETTERS_VZ, "noise", "mnist-dense-clf"),
    "3d": _row("mnist+emnist", DIGITS, LETTERS_VZ, LETTERS_AE + LETTERS_VZ,
               "noise", "mnist-dense-clf"),
    "4a": _row("mnist", DIGITS[:6], ["6", "7"], ["6", "7"], "vae", "mnist-dense-ae", budget=0),
    "4b": _row("mnist", DIGITS[:6], ["6", "7"], ["6", "7", "8", "9"], "vae",
               "mnist-dense-ae", budget=0),
    "4c": _row("mnist", DIGITS[4:], ["0", "1"], ["0", "1"], "vae", "mnist-dense-ae", budget=0),
    "4d": _row("mnist", DIGITS[4:], ["0", "1"], ["0", "1", "2", "3"], "vae",
               "mnist-dense-ae", budget=0),
}


def scenario_preset(scenario_id: str, anomaly_budget: int | None = None,
                    seed: int = 0) -> ExperimentScenario:
    if scenario_id not in SCENARIOS:
        raise KeyError(f"unknown scenario {scenario_id!r}; available: {sorted(SCENARIOS)}")
    row = dict(SCENARIOS[scenario_id])
    if anomaly_budget is not None:
        row["anomaly_budget"] = anomaly_budget
    return ExperimentScenario(id=scenario_id, seed=seed, **row)


def split_indices(y: np.ndarray, ratios: tuple[float, float, float] = (0.80, 0.05, 0.15),
                  seed: int = 0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Disjoint, exhaustive, stratified-by-class index split with a seeded shuffle.

    Classes too small to fill every bucket degrade the whole split to an
    unstratified shuffle (with a warning) so no bucket silently loses a class.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {ratios}")
    y = np.asarray(y)
    rng = derive_rng(seed, "split")
    n_buckets = sum(1 for r in ratios if r > 0)
    class_values, counts = np.unique(y, return_counts=True)
    if counts.min() < n_buckets:
        warnings.warn(f"smallest class has {counts.min()} samples for {n_buckets} "
                      "buckets; falling back to an unstratified split")
        order = rng.permutation(len(y))
        n_train = round(ratios[0] * len(y))
        n_val = round(ratios[1] * len(y))
        return order[:n_train], order[n_train:n_train + n_val], order[n_train + n_val:]

    train_parts, val_parts, test_parts = [], [], []
    for value in class_values:
        members = rng.permutation(np.nonzero(y == value)[0])
        n_train = round(ratios[0] * len(members))
        n_val = round(ratios[1] * len(members))
        train_parts.append(members[:n_train])
        val_parts.append(members[n_train:n_train + n_val])
        test_parts.append(members[n_train + n_val:])
    return (np.concatenate(train_parts), np.concatenate(val_parts),
            np.concatenate(test_parts))


def split_dataset(ds: Dataset, ratios: tuple[float, float, float] = (0.80, 0.05, 0.15),
                  seed: int = 0) -> tuple[Dataset, Dataset, Dataset]:
    train_idx, val_idx, test_idx = split_indices(ds.y, ratios, seed)
    return ds.take(train_idx), ds.take(val_idx), ds.take(test_idx)


@dataclass
class ScenarioData:
    """Arrays a pipeline run consumes: normal-only training features (with
    their class codes, for classifier targets), the capped labeled anomalies,
    and binary-labeled validation/test sets."""

    train_normal: np.ndarray
    train_normal_y: np.ndarray   # codes 0..k-1 into the scenario's normal classes
    train_anomalies: np.ndarray
    val_x: np.ndarray
    val_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray
    feature_dim: int = field(init=False)

    def __post_init__(self):
        self.feature_dim = self.train_normal.shape[1]


def build_scenario(train: Dataset, val: Dataset, test: Dataset,
                   scenario: ExperimentScenario) -> ScenarioData:
    """Filter the three partitions down to one scenario.

    Test/validation keep only normal + test-anomaly classes and carry binary
    labels (1 = anomalous). The anomaly budget draws uniformly without
    replacement from the training partition's train-anomaly rows.
    """
    normal_codes = train.class_codes(scenario.normal_classes)
    train_anom_codes = train.class_codes(scenario.train_anomaly_classes)
    test_anom_codes = train.class_codes(scenario.test_anomaly_classes)

    normal_mask = np.isin(train.y, normal_codes)
    train_normal = train.x[normal_mask]
    recode = {int(code): i for i, code in enumerate(normal_codes)}
    train_normal_y = np.array([recode[int(c)] for c in train.y[normal_mask]], dtype=np.int64)
    pool = train.x[np.isin(train.y, train_anom_codes)]
    budget = scenario.anomaly_budget
    if budget == 0:
        cap = pool[:0]
    elif budget >= pool.shape[0]:
        if budget > pool.shape[0]:
            warnings.warn(f"scenario {scenario.id}: budget {budget} exceeds the "
                          f"{pool.shape[0]} available anomalies; using all")
        cap = pool
    else:
        rng = derive_rng(scenario.seed, "anomaly-budget", scenario.id)
        cap = pool[rng.choice(pool.shape[0], size=budget, replace=False)]

    def binarize(part: Dataset) -> tuple[np.ndarray, np.ndarray]:
        keep = np.isin(part.y, np.concatenate([normal_codes, test_anom_codes]))
        return part.x[keep], np.isin(part.y[keep], test_anom_codes).astype(np.int64)

    val_x, val_y = binarize(val)
    test_x, test_y = binarize(test)
    return ScenarioData(train_normal=train_normal, train_normal_y=train_normal_y,
                        train_anomalies=cap,
                        val_x=val_x, val_y=val_y, test_x=test_x, test_y=test_y)
