"""Configuration-driven experiment orchestration.

``run`` executes scenarios end to end (target -> generator -> alarm ->
baselines -> metrics) for every configured seed, persisting per-seed
reports, ROC files, detector bundles and multi-seed aggregates. ``score``
replays a persisted bundle on new raw data files.
"""

from __future__ import annotations

import json
import logging
import os
import time
import traceback
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from actalarm.alarm import AlarmSpec, Detector, build_alarm, detect, trace_width, train_alarm
from actalarm.baselines import IsolationForest, ae_score
from actalarm.bundle import load_bundle, save_bundle
from actalarm.data.dataset import Dataset
from actalarm.data.idx import load_idx, read_idx_images
from actalarm.data.nsl_kdd import attack_family_map, nsl_kdd_schema
from actalarm.data.scenarios import (
    ExperimentScenario,
    build_scenario,
    scenario_preset,
    split_indices,
)
from actalarm.data.synthetic import LETTER_NAMES
from actalarm.data.tabular import ColumnKind, CsvSchema, Preprocessor, read_csv_rows
from actalarm.generators import NoiseGenerator, NoiseGenSpec, VaeGenerator, VaeSpec, train_vae
from actalarm.metrics import average_precision, roc_auc, roc_points
from actalarm.report import MetricsReport, SeedResult, aggregate, config_fingerprint, write_roc_file
from actalarm.target import TargetKind, build_target, preset_spec, train_target
from actalarm.util import derive_rng

logger = logging.getLogger(__name__)

DATA_ROOT_ENV = "ACTALARM_DATA_ROOT"

CREDITCARD_SCHEMA = CsvSchema(
    columns=[("Time", ColumnKind.NUMERIC)]
    + [(f"V{i}", ColumnKind.NUMERIC) for i in range(1, 29)]
    + [("Amount", ColumnKind.NUMERIC), ("Class", ColumnKind.LABEL)],
    has_header=True,
)


@dataclass
class RunConfig:
    scenarios: list[str]
    seeds: list[int] = field(default_factory=lambda: [1, 2, 3, 4])
    out_dir: str = "runs"
    data_root: str | None = None
    dataset_paths: dict[str, str] = field(default_factory=dict)
    anomaly_budget: int | None = None     # None keeps each scenario's default
    generator: str | None = None          # override "noise"/"vae"
    target_preset: str | None = None
    normal_cap: int | None = 10000        # desk-scale training-normal subsample
    full_data: bool = False
    baselines: bool = True
    target_epochs: int = 30
    alarm_epochs: int = 60
    vae_epochs: int = 30
    target_lr: float = 0.001
    alarm_lr: float = 1e-5
    vae_lr: float = 0.001
    batch_size: int = 256
    lam: float = 1.0
    shift_reg_weight: float = 0.0

    def __post_init__(self):
        if not self.scenarios:
            raise ValueError("config names no scenarios")
        if not self.seeds:
            raise ValueError("config needs at least one seed")
        for sid in self.scenarios:
            scenario_preset(sid)  # raises on unknown ids
        if self.generator not in (None, "noise", "vae"):
            raise ValueError(f"unknown generator {self.generator!r}")

    @classmethod
    def from_json(cls, path: str | Path) -> "RunConfig":
        return cls(**json.loads(Path(path).read_text()))

    def resolved_data_root(self) -> Path | None:
        root = self.data_root or os.environ.get(DATA_ROOT_ENV)
        return Path(root) if root else None

    def effective_cap(self) -> int | None:
        return None if self.full_data else self.normal_cap

    def fingerprint(self, scenario: ExperimentScenario) -> str:
        return config_fingerprint({
            "scenario": scenario.id,
            "dataset": scenario.dataset,
            "normal_classes": scenario.normal_classes,
            "train_anomaly_classes": scenario.train_anomaly_classes,
            "test_anomaly_classes": scenario.test_anomaly_classes,
            "anomaly_budget": scenario.anomaly_budget,
            "generator": scenario.generator,
            "target_preset": scenario.target_preset,
            "normal_cap": self.effective_cap(),
            "target_epochs": self.target_epochs,
            "alarm_epochs": self.alarm_epochs,
            "vae_epochs": self.vae_epochs,
            "target_lr": self.target_lr,
            "alarm_lr": self.alarm_lr,
            "vae_lr": self.vae_lr,
            "batch_size": self.batch_size,
            "lam": self.lam,
            "shift_reg_weight": self.shift_reg_weight,
        })


def _find_file(config: RunConfig, key: str, *candidates: str) -> Path:
    """Resolve a dataset file: explicit override first, then data-root lookups."""
    if key in config.dataset_paths:
        path = Path(config.dataset_paths[key])
        if not path.exists():
            raise FileNotFoundError(f"configured path for {key} does not exist: {path}")
        return path
    root = config.resolved_data_root()
    if root is None:
        raise FileNotFoundError(
            f"no path for {key}: set dataset_paths[{key!r}], data_root, or ${DATA_ROOT_ENV}")
    for candidate in candidates:
        path = root / candidate
        if path.exists():
            return path
    raise FileNotFoundError(f"{key}: none of {list(candidates)} found under {root}")


class _SourceCache:
    """Raw per-dataset loads shared across scenarios and seeds in one run."""

    def __init__(self, config: RunConfig):
        self.config = config
        self._cache: dict[str, object] = {}

    def _mnist_raw(self) -> tuple[Dataset, Dataset]:
        if "mnist" not in self._cache:
            cfg = self.config
            train = load_idx(
                _find_file(cfg, "mnist.train_images",
                           "mnist/train-images-idx3-ubyte", "train-images-idx3-ubyte"),
                _find_file(cfg, "mnist.train_labels",
                           "mnist/train-labels-idx1-ubyte", "train-labels-idx1-ubyte"),
                class_names=[str(d) for d in range(10)])
            test = load_idx(
                _find_file(cfg, "mnist.test_images",
                           "mnist/t10k-images-idx3-ubyte", "t10k-images-idx3-ubyte"),
                _find_file(cfg, "mnist.test_labels",
                           "mnist/t10k-labels-idx1-ubyte", "t10k-labels-idx1-ubyte"),
                class_names=[str(d) for d in range(10)])
            self._cache["mnist"] = (train, test)
        return self._cache["mnist"]

    def _emnist_raw(self) -> tuple[Dataset, Dataset]:
        if "emnist" not in self._cache:
            cfg = self.config
            pairs = []
            for split, img_key, lab_key, img_name, lab_name in [
                ("train", "emnist.train_images", "emnist.train_labels",
                 "emnist-letters-train-images-idx3-ubyte",
                 "emnist-letters-train-labels-idx1-ubyte"),
                ("test", "emnist.test_images", "emnist.test_labels",
                 "emnist-letters-test-images-idx3-ubyte",
                 "emnist-letters-test-labels-idx1-ubyte"),
            ]:
                ds = load_idx(
                    _find_file(cfg, img_key, f"emnist/{img_name}", img_name),
                    _find_file(cfg, lab_key, f"emnist/{lab_name}", lab_name),
                    class_names=["_"] + LETTER_NAMES)  # letters split: labels 1..26 = A..Z
                keep = ds.y >= 1
                pairs.append(Dataset(x=ds.x[keep], y=ds.y[keep] - 1,
                                     classes=LETTER_NAMES, meta=ds.meta))
            self._cache["emnist"] = tuple(pairs)
        return self._cache["emnist"]

    def _csv_raw(self, key: str) -> dict:
        if key not in self._cache:
            cfg = self.config
            if key == "nsl-kdd":
                schema = nsl_kdd_schema()
                family = attack_family_map()
                train_rows, train_labels, _ = read_csv_rows(
                    _find_file(cfg, "nslkdd.train", "nsl-kdd/KDDTrain+.txt", "KDDTrain+.txt"),
                    schema)
                test_rows, test_labels, _ = read_csv_rows(
                    _find_file(cfg, "nslkdd.test", "nsl-kdd/KDDTest+.txt", "KDDTest+.txt"),
                    schema)
                train_labels = [family[l] for l in train_labels]
                test_labels = [family[l] for l in test_labels]
            else:
                schema = CREDITCARD_SCHEMA
                train_rows, train_labels, _ = read_csv_rows(
                    _find_file(cfg, "creditcard.csv", "creditcard/creditcard.csv",
                               "creditcard.csv"),
                    schema)
                label_map = {"0": "normal", "1": "fraud"}
                train_labels = [label_map[l] for l in train_labels]
                test_rows, test_labels = None, None
            self._cache[key] = {"schema": schema, "train_rows": train_rows,
                                "train_labels": train_labels, "test_rows": test_rows,
                                "test_labels": test_labels}
        return self._cache[key]

    def splits(self, dataset: str, seed: int) -> tuple[Dataset, Dataset, Dataset, dict]:
        """(train, val, test, preprocessing_meta) for one scenario seed.

        Image sources have a given test file: the train file contributes the
        80/5 train/val slices and its remaining slice goes unused. Tabular
        sources fit scaling on the train slice only.
        """
        if dataset in ("mnist", "mnist+emnist"):
            train_raw, test_raw = self._mnist_raw()
            if dataset == "mnist+emnist":
                e_train, e_test = self._emnist_raw()
                train_raw = Dataset.merge(train_raw, e_train)
                test_raw = Dataset.merge(test_raw, e_test)
            tr_idx, val_idx, _ = split_indices(train_raw.y, seed=seed)
            return (train_raw.take(tr_idx), train_raw.take(val_idx), test_raw,
                    dict(train_raw.meta))

        raw = self._csv_raw("nsl-kdd" if dataset == "nsl-kdd" else "creditcard")
        labels = np.asarray(raw["train_labels"])
        classes = sorted(set(raw["train_labels"])
                         | set(raw["test_labels"] or []))
        lookup = {name: i for i, name in enumerate(classes)}
        y_all = np.array([lookup[l] for l in raw["train_labels"]], dtype=np.int64)

        if raw["test_rows"] is not None:  # given test set replaces the test slice
            tr_idx, val_idx, _ = split_indices(y_all, seed=seed)
            test_rows = raw["test_rows"]
            y_test = np.array([lookup[l] for l in raw["test_labels"]], dtype=np.int64)
        else:
            tr_idx, val_idx, test_idx = split_indices(y_all, seed=seed)
            test_rows = [raw["train_rows"][i] for i in test_idx]
            y_test = y_all[test_idx]

        pre = Preprocessor(raw["schema"]).fit([raw["train_rows"][i] for i in tr_idx])
        meta = {"kind": "tabular", "preprocessing": pre.to_dict()}

        def mk(rows, y):
            return Dataset(x=pre.transform(rows), y=y, classes=classes, meta=meta)

        return (mk([raw["train_rows"][i] for i in tr_idx], y_all[tr_idx]),
                mk([raw["train_rows"][i] for i in val_idx], y_all[val_idx]),
                mk(test_rows, y_test), meta)


@dataclass
class RunResult:
    out_dir: Path
    aggregates: dict[tuple[str, str], MetricsReport]
    failures: dict[str, str]

    @property
    def ok(self) -> bool:
        return not self.failures


def _scenario_for(config: RunConfig, sid: str, seed: int) -> ExperimentScenario:
    scenario = scenario_preset(sid, anomaly_budget=config.anomaly_budget, seed=seed)
    if config.generator:
        scenario.generator = config.generator
    if config.target_preset:
        scenario.target_preset = config.target_preset
    return scenario


def run_single(config: RunConfig, sources: _SourceCache, sid: str,
               seed: int) -> tuple[dict[str, tuple[SeedResult, list]], Path, dict]:
    """One (scenario, seed) pipeline; returns per-method results, the bundle
    path placeholder and the timing breakdown."""
    scenario = _scenario_for(config, sid, seed)
    train, val, test, pre_meta = sources.splits(scenario.dataset, seed)
    data = build_scenario(train, val, test, scenario)

    normal_x, normal_y = data.train_normal, data.train_normal_y
    cap = config.effective_cap()
    if cap is not None and normal_x.shape[0] > cap:
        keep = derive_rng(seed, "normal-cap", sid).choice(normal_x.shape[0], cap, replace=False)
        normal_x, normal_y = normal_x[keep], normal_y[keep]

    timing: dict[str, float] = {}
    t0 = time.perf_counter()

    spec = preset_spec(scenario.target_preset, input_dim=data.feature_dim,
                       n_classes=len(scenario.normal_classes))
    target = build_target(spec, seed=seed)
    train_target(target, spec, normal_x,
                 labels=normal_y if spec.kind is TargetKind.CLASSIFIER else None,
                 epochs=config.target_epochs, lr=config.target_lr,
                 batch_size=config.batch_size, seed=seed)
    timing["target"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    if scenario.generator == "vae":
        vae_spec = VaeSpec(epochs=config.vae_epochs, lr=config.vae_lr,
                           batch_size=config.batch_size)
        vae, _ = train_vae(normal_x, vae_spec, seed=seed)
        generator = VaeGenerator(vae, seed=seed)
    else:
        generator = NoiseGenerator(NoiseGenSpec(), seed=seed)
    timing["generator"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    alarm_spec = AlarmSpec(lr=config.alarm_lr, epochs=config.alarm_epochs,
                           batch_size=config.batch_size, lam=config.lam,
                           shift_reg_weight=config.shift_reg_weight)
    alarm = build_alarm(trace_width(target), alarm_spec, seed=seed)
    detector = Detector(target, alarm, generator)
    train_alarm(detector, normal_x, data.train_anomalies, alarm_spec, seed=seed)
    timing["alarm"] = time.perf_counter() - t2

    results: dict[str, tuple[SeedResult, list]] = {}
    scores = detect(detector, data.test_x)
    results["alarm"] = (
        SeedResult(seed=seed, ap=average_precision(scores, data.test_y),
                   auc=roc_auc(scores, data.test_y)),
        roc_points(scores, data.test_y))

    if config.baselines:
        if spec.kind is TargetKind.AUTOENCODER:
            ae_scores = ae_score(target, data.test_x)
            results["ae"] = (
                SeedResult(seed=seed, ap=average_precision(ae_scores, data.test_y),
                           auc=roc_auc(ae_scores, data.test_y)),
                roc_points(ae_scores, data.test_y))
        forest = IsolationForest().fit(normal_x, seed=seed)
        if_scores = forest.score(data.test_x)
        results["iforest"] = (
            SeedResult(seed=seed, ap=average_precision(if_scores, data.test_y),
                       auc=roc_auc(if_scores, data.test_y)),
            roc_points(if_scores, data.test_y))

    timing["total"] = time.perf_counter() - t0

    seed_dir = Path(config.out_dir) / sid / f"seed{seed:03d}"
    seed_dir.mkdir(parents=True, exist_ok=True)
    fingerprint = config.fingerprint(scenario)
    for method, (result, points) in results.items():
        report = MetricsReport(scenario_id=sid, method=method,
                               config_fingerprint=fingerprint,
                               seed_results=[result], roc_points=points)
        report.save(seed_dir / f"report_{method}.json")
        write_roc_file(points, seed_dir / f"roc_{method}.txt")
    bundle_path = seed_dir / "detector.bundle"
    save_bundle(detector, pre_meta, bundle_path,
                manifest_extra={"scenario": sid, "seed": seed,
                                "target_spec": spec.to_dict(),
                                "alarm_spec": alarm_spec.to_dict(),
                                "config_fingerprint": fingerprint})
    (seed_dir / "timing.json").write_text(json.dumps(timing, indent=2) + "\n")
    return results, bundle_path, timing


def run(config: RunConfig) -> RunResult:
    """All (scenario, seed) pipelines plus per-scenario aggregation.

    Scenario failures are isolated: completed artifacts stay on disk and the
    failure text is collected per scenario.
    """
    sources = _SourceCache(config)
    out_dir = Path(config.out_dir)
    aggregates: dict[tuple[str, str], MetricsReport] = {}
    failures: dict[str, str] = {}
    for sid in config.scenarios:
        try:
            per_method: dict[str, list[MetricsReport]] = {}
            for seed in config.seeds:
                results, _, timing = run_single(config, sources, sid, seed)
                logger.info("scenario %s seed %d finished in %.1fs", sid, seed,
                            timing["total"])
                for method, (result, _) in results.items():
                    per_method.setdefault(method, []).append(MetricsReport(
                        scenario_id=sid, method=method,
                        config_fingerprint=config.fingerprint(_scenario_for(config, sid, seed)),
                        seed_results=[result]))
            for method, reports in per_method.items():
                agg = reports[0] if len(reports) == 1 else aggregate(reports)
                agg.save(out_dir / sid / f"aggregate_{method}.json")
                aggregates[(sid, method)] = agg
        except Exception:
            failures[sid] = traceback.format_exc()
            logger.error("scenario %s failed:\n%s", sid, failures[sid])
    return RunResult(out_dir=out_dir, aggregates=aggregates, failures=failures)


def score(bundle_path: str | Path, input_path: str | Path,
          output_path: str | Path | None = None) -> tuple[np.ndarray, list[str]]:
    """Score raw rows with a persisted detector, replaying its preprocessing.

    Accepts an IDX image file for image bundles and a same-schema CSV for
    tabular bundles. Returns (scores, warnings); empty input yields empty
    scores. With ``output_path``, writes one score per line.
    """
    detector, manifest = load_bundle(bundle_path)
    meta = manifest["preprocessing"]
    warnings_out: list[str] = []

    if meta["kind"] == "image":
        images = read_idx_images(input_path)
        n = images.shape[0]
        flat_dim = images.shape[1] * images.shape[2]
        if n and flat_dim != detector.target.in_dim:
            raise ValueError(f"bundle expects {detector.target.in_dim}-pixel images, "
                             f"input rows have {flat_dim}")
        x = images.reshape(n, flat_dim).astype(np.float64) / meta.get("pixel_scale", 255)
    else:
        pre = Preprocessor.from_dict(meta["preprocessing"])
        schema = pre.schema
        if schema.has_header:
            with open(input_path, newline="") as fh:
                header = fh.readline().strip().split(",")
            expected = [name for name, _ in schema.columns]
            if header != expected:
                bad = [f"{i}: {got!r} != {want!r}" for i, (got, want)
                       in enumerate(zip(header, expected)) if got != want]
                raise ValueError("input header does not match the bundle schema: "
                                 + "; ".join(bad or [f"{len(header)} columns, "
                                                     f"expected {len(expected)}"]))
        rows, _, dropped = read_csv_rows(input_path, schema)
        if not rows and dropped:
            raise ValueError(f"no input row matches the bundle schema "
                             f"({dropped} rows with wrong shape or non-numeric fields); "
                             f"expected columns: {[n for n, _ in schema.columns]}")
        before = pre.unknown_level_count
        x = pre.transform(rows) if rows else np.zeros((0, pre.width))
        unknown = pre.unknown_level_count - before
        if unknown:
            warnings_out.append(f"{unknown} categorical values outside the training "
                                "levels were scored with a zeroed one-hot group")

    scores = detect(detector, x) if x.shape[0] else np.zeros(0)
    if output_path is not None:
        Path(output_path).write_text("".join(f"{s:.12g}\n" for s in scores))
    for message in warnings_out:
        logger.warning("%s", message)
    return scores, warnings_out
