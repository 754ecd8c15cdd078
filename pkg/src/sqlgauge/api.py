"""HTTP facade over the pipeline: start runs, stream logs, fetch
reports and plots, inspect workloads, trigger augmentation.

One evaluation executes at a time; additional POST /runs requests queue
FIFO behind a single background worker so concurrent runs cannot skew
each other's timings.  Log delivery is long-poll NDJSON with an
``after`` sequence cursor — concatenating successive batches reproduces
the run's logs.ndjson byte for byte.  All errors are JSON
``{code, message}`` bodies.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from .datastore import Catalog, CatalogError
from .gateway import ADAPTER_KINDS, GatewayService
from .pipeline import ConfigError, RunConfig, generate_run_id, run_dir_for, run_evaluation
from .workload import (WorkloadError, WorkloadStore, augment_workload,
                       select_weak_subcategories)

ADAPTER_NOTES = {
    "direct_llm": "calls an OpenAI-style chat completion endpoint",
    "external_http": "POSTs the question to a custom model service",
    "mock_oracle": "echoes the reference SQL (perfect-model baseline)",
    "mock_mutant": "echoes the reference SQL with one seeded defect",
    "mock_template": "answers from the bundled template bank",
}

LOG_POLL_WINDOW_S = 20.0
LOG_POLL_INTERVAL_S = 0.1


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status, detail={"code": code, "message": message})


class RunQueue:
    """FIFO run executor: one background worker, thread-safe registry.

    The registry tracks runs the pipeline has not yet materialized on
    disk (queued, or failed before the run directory existed); once a
    run starts, its status.json is authoritative.
    """

    def __init__(self, workdir: Path):
        self.workdir = workdir
        self._queue: queue.Queue = queue.Queue()
        self._states: dict[str, dict] = {}
        self._lock = threading.Lock()
        self._worker = threading.Thread(target=self._loop, daemon=True,
                                        name="run-worker")
        self._worker.start()

    def submit(self, config: RunConfig) -> str:
        run_id = config.run_id or generate_run_id()
        config = RunConfig.from_dict({**config.to_dict(), "run_id": run_id})
        with self._lock:
            if run_id in self._states:
                raise _error(400, "invalid-config",
                             f"run {run_id!r} is already queued")
            if run_dir_for(self.workdir, run_id).exists():
                raise _error(400, "invalid-config",
                             f"run {run_id!r} already exists")
            self._states[run_id] = {"run_id": run_id, "state": "queued",
                                    "progress": {"completed": 0, "total": 0},
                                    "started_at": "", "finished_at": ""}
        self._queue.put(config)
        return run_id

    def _loop(self) -> None:
        while True:
            config = self._queue.get()
            try:
                run_evaluation(config, self.workdir)
            except Exception as exc:  # noqa: BLE001 - keep the worker alive
                with self._lock:
                    entry = self._states.get(config.run_id, {})
                    entry.update(state="failed", error=str(exc))
                continue
            with self._lock:
                self._states.pop(config.run_id, None)

    def status(self, run_id: str) -> dict:
        """Disk status when the run has started; registry entry before."""
        path = run_dir_for(self.workdir, run_id) / "status.json"
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (FileNotFoundError, json.JSONDecodeError):
            pass
        with self._lock:
            entry = self._states.get(run_id)
            if entry is not None:
                return dict(entry)
        raise _error(404, "unknown-run", f"no run named {run_id!r}")

    def listing(self) -> list[dict]:
        runs_dir = self.workdir / "runs"
        seen = {}
        if runs_dir.is_dir():
            for status_file in sorted(runs_dir.glob("*/status.json")):
                try:
                    body = json.loads(status_file.read_text(encoding="utf-8"))
                except (OSError, json.JSONDecodeError):
                    continue
                seen[body.get("run_id", status_file.parent.name)] = body
        with self._lock:
            for run_id, entry in self._states.items():
                seen.setdefault(run_id, dict(entry))
        return sorted(seen.values(),
                      key=lambda s: (s.get("started_at", ""), s["run_id"]))


def _require_fields(payload: dict, spec: dict) -> None:
    for name, kind in spec.items():
        if name not in payload:
            raise _error(400, "invalid-request", f"missing field {name!r}")
        if not isinstance(payload[name], kind) or \
                isinstance(payload[name], bool):
            wanted = getattr(kind, "__name__", "number")
            raise _error(400, "invalid-request",
                         f"field {name!r} must be {wanted}")


def create_app(workdir: str | Path, *, ui_dir: str | Path | None = None,
               log_poll_window_s: float = LOG_POLL_WINDOW_S) -> FastAPI:
    workdir = Path(workdir)
    app = FastAPI(title="sqlgauge", docs_url=None, redoc_url=None)
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    runs = RunQueue(workdir)
    store = WorkloadStore(workdir)

    @app.exception_handler(HTTPException)
    async def _http_error(_req: Request, exc: HTTPException):
        detail = exc.detail
        if not (isinstance(detail, dict) and "code" in detail):
            detail = {"code": "error", "message": str(detail)}
        return JSONResponse(detail, status_code=exc.status_code)

    @app.exception_handler(RequestValidationError)
    async def _bad_request(_req: Request, exc: RequestValidationError):
        return JSONResponse({"code": "invalid-request", "message": str(exc)},
                            status_code=400)

    def load_report(run_id: str) -> dict:
        path = run_dir_for(workdir, run_id) / "report.json"
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            runs.status(run_id)  # 404s when the run id itself is unknown
            raise _error(404, "report-not-ready",
                         f"run {run_id!r} has not completed") from None

    @app.post("/runs", status_code=202)
    def post_run(payload: dict = Body(...)):
        try:
            config = RunConfig.from_dict(payload)
        except ConfigError as exc:
            raise _error(400, "invalid-config", str(exc)) from exc
        if config.workload_id not in store.ids():
            raise _error(400, "invalid-config",
                         f"unknown workload {config.workload_id!r}")
        return {"run_id": runs.submit(config)}

    @app.get("/runs")
    def list_runs():
        return {"runs": runs.listing()}

    @app.get("/runs/{run_id}/status")
    def run_status(run_id: str):
        return runs.status(run_id)

    @app.get("/runs/{run_id}/logs")
    def run_logs(run_id: str, after: int = 0):
        runs.status(run_id)  # 404 for unknown ids
        log_path = run_dir_for(workdir, run_id) / "logs.ndjson"
        deadline = time.monotonic() + log_poll_window_s
        while True:
            batch = []
            if log_path.is_file():
                for line in log_path.read_text(encoding="utf-8").splitlines():
                    if not line.strip():
                        continue
                    if json.loads(line)["seq"] > after:
                        batch.append(line)
            if batch:
                return Response("\n".join(batch) + "\n",
                                media_type="application/x-ndjson")
            state = runs.status(run_id)["state"]
            if state in ("completed", "failed") or \
                    time.monotonic() >= deadline:
                return Response("", media_type="application/x-ndjson")
            time.sleep(LOG_POLL_INTERVAL_S)

    @app.get("/runs/{run_id}/report")
    def run_report(run_id: str):
        return load_report(run_id)

    @app.get("/runs/{run_id}/plots/{kind}/{metric}")
    def run_plot(run_id: str, kind: str, metric: str):
        runs.status(run_id)
        path = run_dir_for(workdir, run_id) / "plots" / f"{kind}_{metric}.json"
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise _error(404, "unknown-plot",
                         f"run {run_id!r} has no plot {kind}/{metric}") from None

    @app.get("/workloads")
    def list_workloads():
        out = []
        for workload_id in store.ids():
            meta = store.meta(workload_id)
            out.append({
                "workload_id": workload_id,
                "latest_version": meta["latest_version"],
                "versions": meta["versions"],
            })
        return {"workloads": out}

    @app.post("/workloads/{workload_id}/augment", status_code=202)
    def augment(workload_id: str, payload: dict = Body(...)):
        if workload_id not in store.ids():
            raise _error(404, "unknown-workload",
                         f"no workload named {workload_id!r}")
        _require_fields(payload, {"run_id": str, "threshold": (int, float),
                                  "per_subcat": int})
        run_id = payload["run_id"]
        status = runs.status(run_id)
        if status["state"] != "completed":
            raise _error(409, "run-incomplete",
                         f"run {run_id!r} is {status['state']}")
        report = load_report(run_id)
        metric = payload.get("metric", "EA")
        try:
            weak = select_weak_subcategories(
                report, metric=metric, theta=float(payload["threshold"]),
                min_support=int(payload.get("min_support", 3)))
        except ValueError as exc:
            raise _error(400, "invalid-request", str(exc)) from exc
        if not weak:
            raise _error(400, "no-weak-subcategories",
                         f"no subcategory scores below {metric} "
                         f"{payload['threshold']}")

        config_path = run_dir_for(workdir, run_id) / "config.json"
        config = RunConfig.from_dict(json.loads(config_path.read_text()))
        by_id = {m.model_id: m for m in config.models}
        model_id = payload.get("model", config.models[0].model_id)
        if model_id not in by_id:
            raise _error(400, "invalid-request",
                         f"run {run_id!r} has no model {model_id!r}")
        try:
            catalog = Catalog.load(workdir / "catalog.json")
            workload = store.load(workload_id, catalog=catalog)
            gateway = GatewayService(
                by_id[model_id],
                cache_dir=(workdir / "cache") if config.cache else None)
            outcome = augment_workload(
                workload, sorted(weak), int(payload["per_subcat"]), gateway,
                catalog, seed=int(payload.get("seed", 0)), run_id=run_id)
        except (WorkloadError, CatalogError) as exc:
            raise _error(400, "augment-failed", str(exc)) from exc
        accepted = sum(len(v) for v in outcome.accepted.values())
        version = workload.version
        if accepted:
            store.save(outcome.workload,
                       note=f"augmented after run {run_id} with {model_id}: "
                            f"+{accepted} data points across "
                            f"{len(weak)} weak subcategories")
            version = outcome.workload.version
        return {"workload_id": workload_id, "version": version,
                "accepted": accepted,
                "weak_subcategories": sorted(weak),
                "shortfall": outcome.shortfall}

    @app.get("/catalog")
    def get_catalog():
        try:
            catalog = Catalog.load(workdir / "catalog.json")
        except CatalogError as exc:
            raise _error(404, "no-catalog", str(exc)) from exc
        return {"databases": [
            {"db_id": ref.db_id, "engine": ref.engine, "path": str(ref.path)}
            for ref in sorted(catalog.databases.values(),
                              key=lambda r: r.db_id)]}

    @app.get("/models")
    def get_models():
        return {"adapters": [{"kind": kind,
                              "description": ADAPTER_NOTES.get(kind, "")}
                             for kind in ADAPTER_KINDS]}

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True),
                  name="ui")

    return app
