"""Run reports: per-seed metrics, multi-seed aggregation, deterministic JSON.

Report files are a pure function of (config, seed, data): volatile values
such as wall-clock runtime are kept out of the canonical bytes and written
to a sidecar instead, so identical runs produce identical report files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class SeedResult:
    seed: int
    ap: float
    auc: float


@dataclass
class MetricsReport:
    scenario_id: str
    method: str                       # "a3", "ae-baseline", "iforest"
    config_fingerprint: str
    seed_results: list[SeedResult] = field(default_factory=list)
    roc_points: list[tuple[float, float]] = field(default_factory=list)  # per-seed reports only

    @property
    def ap_values(self) -> list[float]:
        return [r.ap for r in self.seed_results]

    @property
    def auc_values(self) -> list[float]:
        return [r.auc for r in self.seed_results]

    def summary(self) -> dict:
        ap_m, ap_s = mean_std(self.ap_values)
        auc_m, auc_s = mean_std(self.auc_values)
        return {
            "ap_mean": ap_m, "ap_std": ap_s,
            "auc_mean": auc_m, "auc_std": auc_s,
            "ap": format_mean_std(ap_m, ap_s),
            "auc": format_mean_std(auc_m, auc_s),
        }

    def to_json(self) -> str:
        doc = {
            "scenario": self.scenario_id,
            "method": self.method,
            "config_fingerprint": self.config_fingerprint,
            "seeds": [{"seed": r.seed, "ap": r.ap, "auc": r.auc} for r in self.seed_results],
            "summary": self.summary(),
            "roc_points": [[fpr, tpr] for fpr, tpr in self.roc_points],
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "MetricsReport":
        doc = json.loads(text)
        return cls(
            scenario_id=doc["scenario"],
            method=doc["method"],
            config_fingerprint=doc["config_fingerprint"],
            seed_results=[SeedResult(seed=s["seed"], ap=s["ap"], auc=s["auc"])
                          for s in doc["seeds"]],
            roc_points=[(p[0], p[1]) for p in doc.get("roc_points", [])],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "MetricsReport":
        return cls.from_json(Path(path).read_text())


def mean_std(values: list[float]) -> tuple[float, float]:
    """Sample mean and sample standard deviation (ddof=1; 0.0 for a single value)."""
    if not values:
        raise ValueError("no values to aggregate")
    n = len(values)
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, var ** 0.5


def format_mean_std(mean: float, std: float) -> str:
    """Two-decimal ".98±.00" rendering; values rounding to one keep a leading 1."""
    def fmt(v: float) -> str:
        text = f"{v:.2f}"
        if text.startswith("0."):
            return text[1:]
        if text == "1.00":
            return "1.0"
        return text
    return f"{fmt(mean)}±{fmt(std)}"


def aggregate(reports: list[MetricsReport]) -> MetricsReport:
    """Merge per-seed reports for one (scenario, method) into a multi-seed report.

    Rejects mixed scenarios/methods and mismatched config fingerprints, so
    results from different configurations cannot be silently pooled.
    """
    if len(reports) < 2:
        raise ValueError("aggregation needs at least two reports")
    first = reports[0]
    for rep in reports[1:]:
        if rep.scenario_id != first.scenario_id or rep.method != first.method:
            raise ValueError(
                f"cannot aggregate {rep.scenario_id}/{rep.method} "
                f"with {first.scenario_id}/{first.method}")
        if rep.config_fingerprint != first.config_fingerprint:
            raise ValueError(
                f"config fingerprint mismatch: {rep.config_fingerprint} != "
                f"{first.config_fingerprint}")
    merged: list[SeedResult] = []
    for rep in reports:
        merged.extend(rep.seed_results)
    merged.sort(key=lambda r: r.seed)
    return MetricsReport(
        scenario_id=first.scenario_id,
        method=first.method,
        config_fingerprint=first.config_fingerprint,
        seed_results=merged,
    )


def config_fingerprint(payload: dict) -> str:
    """Stable SHA-256 of a JSON-serializable config subset."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def write_roc_file(points: list[tuple[float, float]], path: str | Path) -> None:
    """Two-column FPR/TPR text file for external plotting."""
    lines = [f"{fpr:.12g}\t{tpr:.12g}" for fpr, tpr in points]
    Path(path).write_text("\n".join(lines) + "\n")
