"""HTTP service contract, exercised in-process with TestClient."""

import json
import time

import pytest
from fastapi.testclient import TestClient

from sqlgauge.api import create_app
from sqlgauge.bundled import materialize_demo
from sqlgauge.gateway import ADAPTER_KINDS


@pytest.fixture()
def workdir(tmp_path):
    materialize_demo(tmp_path)
    return tmp_path


@pytest.fixture()
def client(workdir):
    with TestClient(create_app(workdir, log_poll_window_s=0.3)) as c:
        yield c


def oracle_payload(**overrides):
    payload = {
        "workload_id": "sample_easy",
        "metrics": ["EA", "EM"],
        "models": [{"model_id": "oracle", "kind": "mock_oracle"}],
        "seed": 11,
    }
    payload.update(overrides)
    return payload


def wait_for(client, run_id, deadline_s=90.0):
    deadline = time.monotonic() + deadline_s
    while time.monotonic() < deadline:
        status = client.get(f"/runs/{run_id}/status").json()
        if status["state"] in ("completed", "failed"):
            return status
        time.sleep(0.05)
    raise AssertionError(f"run {run_id} did not finish: {status}")


def fake_running_run(workdir, run_id="stuck"):
    """A run directory whose status says it is still in flight."""
    rd = workdir / "runs" / run_id
    rd.mkdir(parents=True)
    (rd / "status.json").write_text(json.dumps({
        "run_id": run_id, "state": "running",
        "progress": {"completed": 3, "total": 20},
        "started_at": "2026-01-01T00:00:00+00:00", "finished_at": "",
    }))
    return run_id


# -- static lookups -------------------------------------------------------------


def test_catalog_lists_databases(client):
    body = client.get("/catalog").json()
    assert [d["db_id"] for d in body["databases"]] == ["campus", "retail"]
    assert all(d["engine"] == "sqlite" for d in body["databases"])


def test_models_lists_every_adapter_kind(client):
    body = client.get("/models").json()
    assert [a["kind"] for a in body["adapters"]] == list(ADAPTER_KINDS)
    assert all(a["description"] for a in body["adapters"])


def test_workloads_listing_shows_lineage(client):
    body = client.get("/workloads").json()
    by_id = {w["workload_id"]: w for w in body["workloads"]}
    assert by_id["sample_easy"]["latest_version"] == 1
    assert list(by_id["sample_easy"]["versions"]) == ["1"]


# -- run lifecycle ------------------------------------------------------------------


def test_run_lifecycle(client, workdir):
    resp = client.post("/runs", json=oracle_payload(run_id="api-run"))
    assert resp.status_code == 202
    assert resp.json() == {"run_id": "api-run"}

    status = wait_for(client, "api-run")
    assert status["state"] == "completed"
    assert status["progress"] == {"completed": 20, "total": 20}
    assert status["started_at"] <= status["finished_at"]

    listing = client.get("/runs").json()["runs"]
    assert "api-run" in [s["run_id"] for s in listing]

    report = client.get("/runs/api-run/report").json()
    assert report["models"][0]["overall"]["EA"]["score"] == 1.0

    # the finished run's directory now blocks the id for good
    again = client.post("/runs", json=oracle_payload(run_id="api-run"))
    assert again.status_code == 400
    assert again.json()["code"] == "invalid-config"


def test_runs_queue_fifo(client):
    first = client.post("/runs", json=oracle_payload(run_id="fifo-1"))
    second = client.post("/runs", json=oracle_payload(run_id="fifo-2"))
    assert first.status_code == second.status_code == 202

    s1 = wait_for(client, "fifo-1")
    s2 = wait_for(client, "fifo-2")
    assert s1["state"] == s2["state"] == "completed"
    # one worker: the second run cannot start before the first finishes
    assert s2["started_at"] >= s1["finished_at"]


def test_run_rejects_bad_configs(client):
    resp = client.post("/runs", json=oracle_payload(metrics=["EA", "NOPE"]))
    assert resp.status_code == 400
    assert resp.json()["code"] == "invalid-config"

    resp = client.post("/runs", json=oracle_payload(workload_id="ghost"))
    assert resp.status_code == 400
    assert "ghost" in resp.json()["message"]


def test_malformed_body_is_a_400(client):
    resp = client.post("/runs", json=["not", "a", "config"])
    assert resp.status_code == 400
    assert resp.json()["code"] == "invalid-request"


def test_unknown_run_is_a_404_everywhere(client):
    for url in ("/runs/ghost/status", "/runs/ghost/logs",
                "/runs/ghost/report", "/runs/ghost/plots/scaling/EA"):
        resp = client.get(url)
        assert resp.status_code == 404, url
        assert resp.json()["code"] == "unknown-run", url


def test_report_of_an_unfinished_run_is_not_ready(client, workdir):
    run_id = fake_running_run(workdir)
    resp = client.get(f"/runs/{run_id}/report")
    assert resp.status_code == 404
    assert resp.json()["code"] == "report-not-ready"


# -- logs ---------------------------------------------------------------------------


def test_log_cursor_reproduces_the_file(client, workdir):
    client.post("/runs", json=oracle_payload(run_id="logged"))
    wait_for(client, "logged")

    chunks, after = [], 0
    while True:
        resp = client.get(f"/runs/logged/logs", params={"after": after})
        assert resp.status_code == 200
        if not resp.text:
            break
        chunks.append(resp.text)
        after = max(json.loads(line)["seq"]
                    for line in resp.text.splitlines())

    disk = (workdir / "runs" / "logged" / "logs.ndjson").read_text()
    assert "".join(chunks) == disk
    assert disk  # the run actually logged something


def test_log_cursor_skips_already_seen_lines(client, workdir):
    client.post("/runs", json=oracle_payload(run_id="tail"))
    wait_for(client, "tail")
    lines = (workdir / "runs" / "tail" / "logs.ndjson").read_text().splitlines()
    cut = json.loads(lines[2])["seq"]
    resp = client.get("/runs/tail/logs", params={"after": cut})
    assert resp.text.splitlines() == lines[3:]


# -- plots --------------------------------------------------------------------------


def test_plot_payloads(client):
    client.post("/runs", json=oracle_payload(run_id="plotted"))
    wait_for(client, "plotted")

    resp = client.get("/runs/plotted/plots/model_comparison/EA")
    assert resp.status_code == 200
    assert resp.json()["kind"] == "model_comparison"

    resp = client.get("/runs/plotted/plots/model_comparison/nope")
    assert resp.status_code == 404
    assert resp.json()["code"] == "unknown-plot"


# -- augmentation -------------------------------------------------------------------


@pytest.fixture()
def weak_run(client):
    payload = oracle_payload(
        run_id="weak", metrics=["EA"],
        models=[{"model_id": "chaos", "kind": "mock_mutant",
                 "options": {"mutation": "column_swap"}},
                {"model_id": "writer", "kind": "mock_template"}])
    assert client.post("/runs", json=payload).status_code == 202
    assert wait_for(client, "weak")["state"] == "completed"
    return "weak"


def test_augment_happy_path(client, weak_run):
    resp = client.post("/workloads/sample_easy/augment", json={
        "run_id": weak_run, "threshold": 0.9, "per_subcat": 1,
        "min_support": 1, "model": "writer"})
    assert resp.status_code == 202
    body = resp.json()
    assert body["workload_id"] == "sample_easy"
    assert body["accepted"] > 0
    assert body["version"] == 2
    assert body["weak_subcategories"] == sorted(body["weak_subcategories"])

    listing = client.get("/workloads").json()["workloads"]
    easy = next(w for w in listing if w["workload_id"] == "sample_easy")
    assert easy["latest_version"] == 2
    assert sorted(easy["versions"]) == ["1", "2"]


def test_augment_with_no_weak_subcategories(client, weak_run):
    resp = client.post("/workloads/sample_easy/augment", json={
        "run_id": weak_run, "threshold": 0, "per_subcat": 1,
        "min_support": 1})
    assert resp.status_code == 400
    assert resp.json()["code"] == "no-weak-subcategories"


def test_augment_validates_its_payload(client, weak_run):
    missing = client.post("/workloads/sample_easy/augment",
                          json={"run_id": weak_run, "threshold": 0.9})
    assert missing.status_code == 400
    assert missing.json()["code"] == "invalid-request"

    bad_type = client.post("/workloads/sample_easy/augment", json={
        "run_id": weak_run, "threshold": True, "per_subcat": 1})
    assert bad_type.status_code == 400

    bad_model = client.post("/workloads/sample_easy/augment", json={
        "run_id": weak_run, "threshold": 0.9, "per_subcat": 1,
        "min_support": 1, "model": "nobody"})
    assert bad_model.status_code == 400
    assert "nobody" in bad_model.json()["message"]


def test_augment_unknown_workload(client, weak_run):
    resp = client.post("/workloads/ghost/augment", json={
        "run_id": weak_run, "threshold": 0.9, "per_subcat": 1})
    assert resp.status_code == 404
    assert resp.json()["code"] == "unknown-workload"


def test_augment_requires_a_finished_run(client, workdir):
    run_id = fake_running_run(workdir)
    resp = client.post("/workloads/sample_easy/augment", json={
        "run_id": run_id, "threshold": 0.9, "per_subcat": 1})
    assert resp.status_code == 409
    assert resp.json()["code"] == "run-incomplete"
