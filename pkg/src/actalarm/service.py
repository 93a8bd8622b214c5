"""HTTP service wrapping the core package.

Detector bundles are immutable after training, so scoring is safe to serve
to many clients from one process. Experiment runs execute as background
jobs; reports are aggregated on demand.
"""

from __future__ import annotations

import json
import threading
import traceback
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from actalarm import __version__
from actalarm.bundle import load_bundle
from actalarm.report import MetricsReport, aggregate
from actalarm.runner import RunConfig, run, score


class HealthResponse(BaseModel):
    status: str
    version: str


class LoadBundleRequest(BaseModel):
    path: str


class BundleInfo(BaseModel):
    bundle_id: str
    path: str
    scenario: str | None = None
    seed: int | None = None
    input_kind: str


class ScoreRequest(BaseModel):
    rows: list[list[float]] = Field(
        description="Raw feature rows: flattened [0, 1] pixels for image "
                    "bundles, preprocessed feature vectors are not accepted")


class ScoreFileRequest(BaseModel):
    input_path: str
    output_path: str | None = None


class ScoreResponse(BaseModel):
    scores: list[float]
    warnings: list[str] = Field(default_factory=list)


class RunRequest(BaseModel):
    scenarios: list[str]
    seeds: list[int] = [1, 2, 3, 4]
    out_dir: str = "runs"
    data_root: str | None = None
    dataset_paths: dict[str, str] = Field(default_factory=dict)
    anomaly_budget: int | None = None
    generator: str | None = None
    target_preset: str | None = None
    normal_cap: int | None = 10000
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


class RunStatus(BaseModel):
    run_id: str
    state: str                      # "running", "done", "failed"
    scenario_failures: dict[str, str] = Field(default_factory=dict)
    report_paths: list[str] = Field(default_factory=list)
    error: str | None = None


class AggregateRequest(BaseModel):
    report_paths: list[str]


class AggregateResponse(BaseModel):
    report: dict


class _Job:
    def __init__(self):
        self.state = "running"
        self.result = None
        self.error: str | None = None


def create_app(bundle_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="actalarm",
                  description="activation-based anomaly detection service")
    bundles: dict[str, tuple[object, dict, Path]] = {}
    jobs: dict[str, _Job] = {}

    def _register(path: Path) -> BundleInfo:
        detector, manifest = load_bundle(path)
        bundle_id = path.stem if path.stem not in bundles else uuid.uuid4().hex[:8]
        bundles[bundle_id] = (detector, manifest, path)
        return BundleInfo(bundle_id=bundle_id, path=str(path),
                          scenario=manifest.get("scenario"),
                          seed=manifest.get("seed"),
                          input_kind=manifest["preprocessing"]["kind"])

    if bundle_dir is not None:
        for path in sorted(Path(bundle_dir).glob("**/*.bundle")):
            _register(path)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.get("/bundles", response_model=list[BundleInfo])
    def list_bundles():
        return [BundleInfo(bundle_id=bid, path=str(path),
                           scenario=manifest.get("scenario"),
                           seed=manifest.get("seed"),
                           input_kind=manifest["preprocessing"]["kind"])
                for bid, (_, manifest, path) in sorted(bundles.items())]

    @app.post("/bundles", response_model=BundleInfo)
    def load_bundle_endpoint(request: LoadBundleRequest):
        path = Path(request.path)
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"no bundle at {path}")
        try:
            return _register(path)
        except Exception as exc:
            raise HTTPException(status_code=400, detail=f"unreadable bundle: {exc}")

    @app.post("/bundles/{bundle_id}/score", response_model=ScoreResponse)
    def score_rows(bundle_id: str, request: ScoreRequest):
        if bundle_id not in bundles:
            raise HTTPException(status_code=404, detail=f"unknown bundle {bundle_id!r}")
        detector, manifest, _ = bundles[bundle_id]
        if manifest["preprocessing"]["kind"] != "image":
            raise HTTPException(
                status_code=400,
                detail="inline rows are supported for image bundles only; "
                       "tabular data needs schema replay - use /score-file")
        if not request.rows:
            return ScoreResponse(scores=[])
        x = np.asarray(request.rows, dtype=float)
        if x.ndim != 2 or x.shape[1] != detector.target.in_dim:
            raise HTTPException(
                status_code=400,
                detail=f"rows must be {detector.target.in_dim}-dimensional")
        return ScoreResponse(scores=[float(s) for s in detector.detect(x)])

    @app.post("/bundles/{bundle_id}/score-file", response_model=ScoreResponse)
    def score_file(bundle_id: str, request: ScoreFileRequest):
        if bundle_id not in bundles:
            raise HTTPException(status_code=404, detail=f"unknown bundle {bundle_id!r}")
        _, _, path = bundles[bundle_id]
        if not Path(request.input_path).exists():
            raise HTTPException(status_code=404, detail=f"no input at {request.input_path}")
        try:
            scores, warnings = score(path, request.input_path, request.output_path)
        except Exception as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return ScoreResponse(scores=[float(s) for s in scores], warnings=warnings)

    @app.post("/runs", response_model=RunStatus)
    def submit_run(request: RunRequest):
        try:
            config = RunConfig(**request.model_dump())
        except (ValueError, KeyError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        run_id = uuid.uuid4().hex[:12]
        job = _Job()
        jobs[run_id] = job

        def work():
            try:
                job.result = run(config)
                job.state = "failed" if job.result.failures else "done"
            except Exception:
                job.state = "failed"
                job.error = traceback.format_exc()

        threading.Thread(target=work, daemon=True).start()
        return RunStatus(run_id=run_id, state=job.state)

    @app.get("/runs/{run_id}", response_model=RunStatus)
    def run_status(run_id: str):
        if run_id not in jobs:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id!r}")
        job = jobs[run_id]
        reports = []
        failures = {}
        if job.result is not None:
            reports = [str(job.result.out_dir / sid / f"aggregate_{method}.json")
                       for sid, method in job.result.aggregates]
            failures = job.result.failures
        return RunStatus(run_id=run_id, state=job.state, error=job.error,
                         scenario_failures=failures, report_paths=reports)

    @app.post("/aggregate", response_model=AggregateResponse)
    def aggregate_reports(request: AggregateRequest):
        try:
            reports = [MetricsReport.load(p) for p in request.report_paths]
            merged = aggregate(reports)
        except FileNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return AggregateResponse(report=json.loads(merged.to_json()))

    return app
