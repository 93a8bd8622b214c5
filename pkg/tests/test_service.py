"""HTTP service surface: health, bundle scoring, run jobs, aggregation."""

import time
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from actalarm.data.synthetic import write_digit_corpus
from actalarm.runner import RunConfig, run
from actalarm.service import create_app

TINY = dict(normal_cap=500, target_epochs=2, alarm_epochs=2, batch_size=128)


@pytest.fixture(scope="module")
def env(tmp_path_factory):
    root = tmp_path_factory.mktemp("svc")
    data = root / "data"
    write_digit_corpus(data, n_train=1000, n_test=300, seed=0)
    out = root / "out"
    config = RunConfig(scenarios=["1a"], seeds=[1], out_dir=str(out),
                       data_root=str(data), baselines=False, **TINY)
    result = run(config)
    assert result.ok
    return {"data": data, "out": out,
            "bundle": out / "1a" / "seed001" / "detector.bundle"}


@pytest.fixture(scope="module")
def client(env):
    app = create_app(bundle_dir=env["out"])
    with TestClient(app) as c:
        yield c


class TestHealthAndBundles:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"

    def test_bundles_preloaded_from_dir(self, client):
        bundles = client.get("/bundles").json()
        assert len(bundles) == 1
        assert bundles[0]["scenario"] == "1a"
        assert bundles[0]["input_kind"] == "image"

    def test_load_missing_bundle_404(self, client):
        response = client.post("/bundles", json={"path": "/nonexistent.bundle"})
        assert response.status_code == 404


class TestScoring:
    def test_score_inline_rows(self, client, env):
        from actalarm.data import load_idx
        ds = load_idx(env["data"] / "t10k-images-idx3-ubyte",
                      env["data"] / "t10k-labels-idx1-ubyte")
        bundle_id = client.get("/bundles").json()[0]["bundle_id"]
        rows = ds.x[:5].tolist()
        body = client.post(f"/bundles/{bundle_id}/score", json={"rows": rows}).json()
        assert len(body["scores"]) == 5
        assert all(0.0 <= s <= 1.0 for s in body["scores"])

    def test_score_empty_rows(self, client):
        bundle_id = client.get("/bundles").json()[0]["bundle_id"]
        body = client.post(f"/bundles/{bundle_id}/score", json={"rows": []}).json()
        assert body["scores"] == []

    def test_score_wrong_width_400(self, client):
        bundle_id = client.get("/bundles").json()[0]["bundle_id"]
        response = client.post(f"/bundles/{bundle_id}/score", json={"rows": [[0.1, 0.2]]})
        assert response.status_code == 400

    def test_score_file_endpoint(self, client, env):
        bundle_id = client.get("/bundles").json()[0]["bundle_id"]
        body = client.post(f"/bundles/{bundle_id}/score-file",
                           json={"input_path": str(env["data"] / "t10k-images-idx3-ubyte")})
        assert body.status_code == 200
        assert len(body.json()["scores"]) == 300

    def test_unknown_bundle_404(self, client):
        response = client.post("/bundles/nope/score", json={"rows": []})
        assert response.status_code == 404

    def test_scores_match_core_scorer(self, client, env):
        from actalarm.runner import score as score_core
        bundle_id = client.get("/bundles").json()[0]["bundle_id"]
        via_http = client.post(
            f"/bundles/{bundle_id}/score-file",
            json={"input_path": str(env["data"] / "t10k-images-idx3-ubyte")}).json()["scores"]
        direct, _ = score_core(env["bundle"], env["data"] / "t10k-images-idx3-ubyte")
        np.testing.assert_allclose(via_http, direct, atol=1e-12)


class TestRunJobs:
    def test_submit_poll_and_fetch_reports(self, client, env, tmp_path_factory):
        out = tmp_path_factory.mktemp("svc_run")
        payload = dict(scenarios=["1a"], seeds=[1, 2], out_dir=str(out),
                       data_root=str(env["data"]), baselines=False, **TINY)
        run_id = client.post("/runs", json=payload).json()["run_id"]
        for _ in range(600):
            status = client.get(f"/runs/{run_id}").json()
            if status["state"] != "running":
                break
            time.sleep(0.5)
        assert status["state"] == "done", status
        assert status["report_paths"]
        assert Path(status["report_paths"][0]).exists()

    def test_bad_config_400(self, client):
        response = client.post("/runs", json={"scenarios": ["9z"], "seeds": [1]})
        assert response.status_code == 400

    def test_unknown_run_404(self, client):
        assert client.get("/runs/deadbeef").status_code == 404


class TestAggregateEndpoint:
    def test_aggregates_seed_reports(self, client, env, tmp_path_factory):
        out = tmp_path_factory.mktemp("svc_agg")
        payload = dict(scenarios=["1a"], seeds=[3, 4], out_dir=str(out),
                       data_root=str(env["data"]), baselines=False, **TINY)
        run_id = client.post("/runs", json=payload).json()["run_id"]
        while client.get(f"/runs/{run_id}").json()["state"] == "running":
            time.sleep(0.5)
        paths = [str(out / "1a" / f"seed00{s}" / "report_alarm.json") for s in (3, 4)]
        body = client.post("/aggregate", json={"report_paths": paths}).json()
        assert {s["seed"] for s in body["report"]["seeds"]} == {3, 4}

    def test_fingerprint_mismatch_400(self, client, env, tmp_path_factory):
        out = tmp_path_factory.mktemp("svc_agg2")
        payload = dict(scenarios=["1a"], seeds=[5], out_dir=str(out),
                       data_root=str(env["data"]), baselines=False, **TINY)
        run_id = client.post("/runs", json=payload).json()["run_id"]
        while client.get(f"/runs/{run_id}").json()["state"] == "running":
            time.sleep(0.5)
        # different epochs -> different fingerprint
        payload2 = dict(payload, target_epochs=3, out_dir=str(out) + "2")
        run_id2 = client.post("/runs", json=payload2).json()["run_id"]
        while client.get(f"/runs/{run_id2}").json()["state"] == "running":
            time.sleep(0.5)
        paths = [str(out / "1a" / "seed005" / "report_alarm.json"),
                 str(Path(str(out) + "2") / "1a" / "seed005" / "report_alarm.json")]
        response = client.post("/aggregate", json={"report_paths": paths})
        assert response.status_code == 400
