"""End-to-end evaluation runner.

Stage order: scale databases, align the workload, generate SQL for every
(data point × model × iteration), execute and score on every scale
factor, aggregate, persist.  Generation happens once per (data point,
model, iteration) — scale factors change where queries *run*, not what
the model says — and ground truth executes once per (data point,
factor), shared across models through a locked memo.

Determinism contract: with mock adapters, fixed seed, and wall-clock-
free metrics, records.jsonl is byte-identical across runs and worker
counts.  Everything order-sensitive is sorted canonically before
persistence, and nothing run-specific (ids, timestamps, worker counts)
leaks into records.jsonl or report.json — those live in meta.json.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
import secrets
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ..datastore import (Catalog, ExecError, ensure_scaled, execute_query,
                         introspect_schema, measure_time)
from ..gateway import (AdapterError, GatewayService, RequestContext,
                       build_generation_prompt, schema_text)
from ..metrics import (ComparisonPolicy, MetricOutcome,
                       classification_consistency, efficiency_within_tolerance,
                       exact_match_metric, execution_accuracy, token_usage)
from ..repair import suggest_repairs
from ..reporting import (aggregate_records, build_model_comparison,
                         build_scaling, report_bytes, write_plot)
from ..sqlast import SqlAstError, classify, parse_sql
from ..workload import TargetDistribution, WorkloadStore, align_workload
from .config import ConfigError, RunConfig

EM_MODE = "spider_compatible"


class RunNotFound(Exception):
    pass


def _utcnow() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


class RunLogger:
    """Thread-safe append-only NDJSON event log with sequence numbers."""

    def __init__(self, path: Path):
        self.path = path
        self._lock = threading.Lock()
        self._seq = 0
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("", encoding="utf-8")

    def event(self, name: str, **fields) -> int:
        with self._lock:
            self._seq += 1
            entry = {"seq": self._seq, "ts": _utcnow(), "event": name}
            entry.update(fields)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
            return self._seq


class _OnceMap:
    """Compute-once cache with per-key locking and a computation counter."""

    def __init__(self):
        self._results: dict = {}
        self._locks: dict = {}
        self._guard = threading.Lock()
        self.computations = 0

    def get(self, key, compute):
        with self._guard:
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            if key not in self._results:
                self._results[key] = compute()
                with self._guard:
                    self.computations += 1
            return self._results[key]


@dataclass(frozen=True)
class RunResult:
    run_id: str
    run_dir: Path
    report: dict


def run_dir_for(workdir: str | Path, run_id: str) -> Path:
    return Path(workdir) / "runs" / run_id


def generate_run_id() -> str:
    stamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%d-%H%M%S")
    return f"run-{stamp}-{secrets.token_hex(3)}"


def load_run(workdir: str | Path, run_id: str) -> RunResult:
    rd = run_dir_for(workdir, run_id)
    report_path = rd / "report.json"
    if not report_path.is_file():
        raise RunNotFound(f"no completed run named {run_id!r}")
    report = json.loads(report_path.read_text(encoding="utf-8"))
    return RunResult(run_id=run_id, run_dir=rd, report=report)


def load_records(workdir: str | Path, run_id: str) -> list[dict]:
    rd = run_dir_for(workdir, run_id)
    path = rd / "records.jsonl"
    if not path.is_file():
        raise RunNotFound(f"run {run_id!r} has no records")
    return [json.loads(line) for line
            in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def _status_writer(path: Path, run_id: str, started_at: str):
    lock = threading.Lock()

    def write(state: str, completed: int, total: int,
              finished_at: str = "") -> None:
        body = {"run_id": run_id, "state": state,
                "progress": {"completed": completed, "total": total},
                "started_at": started_at, "finished_at": finished_at}
        with lock:
            _atomic_write_bytes(path, (json.dumps(body, sort_keys=True)
                                       + "\n").encode())

    return write


def _generate(gateway: GatewayService, dp, iteration: int,
              schema: str) -> dict:
    """One model call (or cache hit) plus the token outcome it implies."""
    prompt = build_generation_prompt(dp.question, schema)
    context = RequestContext(db_id=dp.db_id, question=dp.question,
                             gt_sql=dp.gt_sql, iteration=iteration)
    try:
        result = gateway.generate(prompt, context, extra=f"iter:{iteration}")
    except AdapterError as exc:
        return {"sql_text": "", "input_tokens": None, "output_tokens": None,
                "latency_ms": 0.0, "cached": False, "error": str(exc),
                "tu": MetricOutcome("TU", None,
                                    {"reason": "generation-failed"})}
    response = result.response
    tu = token_usage(input_tokens=response.input_tokens,
                     output_tokens=response.output_tokens,
                     prompt_text=prompt, response_text=response.text)
    return {"sql_text": result.sql, "input_tokens": response.input_tokens,
            "output_tokens": response.output_tokens,
            "latency_ms": response.latency_ms, "cached": result.cached,
            "error": "", "tu": tu}


def _ground_truth(dp, db_path: Path, want_timing: bool,
                  repetitions: int) -> dict:
    try:
        result = execute_query(db_path, dp.gt_sql)
        error = ""
    except ExecError as exc:
        return {"result": None, "error": str(exc), "timing": None}
    timing = None
    if want_timing:
        timing = measure_time(db_path, dp.gt_sql, repetitions=repetitions)
    return {"result": result, "error": error, "timing": timing}


def _evaluate(dp, gen: dict, db_path: Path, gt: dict, metrics: tuple,
              policy: ComparisonPolicy, tau: float, repetitions: int,
              schema_columns: dict) -> dict:
    try:
        gt_ast = parse_sql(dp.gt_sql)
    except SqlAstError:
        gt_ast = None

    cand_table = None
    cand_error = gen["error"] or None
    if not gen["error"] and gen["sql_text"].strip():
        try:
            cand_table = execute_query(db_path, gen["sql_text"])
        except ExecError as exc:
            cand_error = str(exc)
    elif not cand_error:
        cand_error = "empty-generation"

    outcomes: dict[str, MetricOutcome] = {}
    for metric in metrics:
        if metric == "EA":
            if gt["result"] is None:
                outcomes[metric] = MetricOutcome(
                    "EA", None, {"reason": "gt-execution-failed"})
            else:
                outcomes[metric] = execution_accuracy(
                    cand_table, gt["result"], policy, error=cand_error)
        elif metric == "EM":
            if gt_ast is None:
                outcomes[metric] = MetricOutcome(
                    "EM", None, {"reason": "gt-unparsable"})
            else:
                outcomes[metric] = exact_match_metric(
                    gen["sql_text"], gt_ast, mode=EM_MODE,
                    schema=schema_columns)
        elif metric == "CC":
            if gt_ast is None:
                outcomes[metric] = MetricOutcome(
                    "CC", None, {"reason": "gt-unparsable"})
            else:
                outcomes[metric] = classification_consistency(
                    gen["sql_text"], gt_ast)
        elif metric == "ETC":
            if gt["timing"] is None:
                outcomes[metric] = MetricOutcome(
                    "ETC", None, {"reason": "gt-timing-unavailable"})
            elif cand_table is None:
                outcomes[metric] = MetricOutcome(
                    "ETC", False, {"reason": cand_error or "no-candidate"})
            else:
                cand_timing = measure_time(db_path, gen["sql_text"],
                                           repetitions=repetitions)
                outcomes[metric] = efficiency_within_tolerance(
                    cand_timing, gt["timing"], tau=tau)
        elif metric == "TU":
            outcomes[metric] = gen["tu"]

    repairs = []
    ea = outcomes.get("EA")
    if (ea is not None and ea.value is False and cand_table is not None
            and gt["result"] is not None):
        repairs = [s.to_json() for s in suggest_repairs(cand_table,
                                                        gt["result"], policy)]

    try:
        gen_label = classify(parse_sql(gen["sql_text"])).code
    except SqlAstError:
        gen_label = None

    return {"gen_label": gen_label,
            "outcomes": {m: o.to_json() for m, o in outcomes.items()},
            "repairs": repairs}


def run_evaluation(config: RunConfig, workdir: str | Path) -> RunResult:
    workdir = Path(workdir)
    run_id = config.run_id or generate_run_id()
    rd = run_dir_for(workdir, run_id)
    if rd.exists():
        raise ConfigError(f"run directory already exists: {rd}")
    rd.mkdir(parents=True)
    (rd / "plots").mkdir()

    started_at = _utcnow()
    started_clock = time.monotonic()
    log = RunLogger(rd / "logs.ndjson")
    write_status = _status_writer(rd / "status.json", run_id, started_at)
    snapshot = config.to_dict()
    snapshot["run_id"] = run_id
    _atomic_write_bytes(rd / "config.json",
                        (json.dumps(snapshot, indent=2, sort_keys=True)
                         + "\n").encode())

    try:
        result = _execute_run(config, workdir, rd, run_id, log, write_status)
    except Exception as exc:
        log.event("run_failed", error=str(exc))
        write_status("failed", 0, 0, finished_at=_utcnow())
        raise

    meta = result.report.pop("_meta")
    meta.update({"run_id": run_id, "started_at": started_at,
                 "finished_at": _utcnow(),
                 "wall_clock_s": round(time.monotonic() - started_clock, 3),
                 "concurrency": config.concurrency, "cache": config.cache,
                 "status": "completed"})
    _atomic_write_bytes(rd / "meta.json",
                        (json.dumps(meta, indent=2, sort_keys=True)
                         + "\n").encode())
    _atomic_write_bytes(rd / "report.json", report_bytes(result.report))

    for metric in config.metrics:
        write_plot(build_model_comparison([result.report], metric),
                   rd / "plots")
        write_plot(build_scaling(result.report, metric), rd / "plots")

    log.event("run_completed", run_id=run_id,
              records=result.report["totals"]["records"])
    total = result.report["totals"]["records"]
    write_status("completed", total, total, finished_at=_utcnow())
    return result


def _execute_run(config: RunConfig, workdir: Path, rd: Path, run_id: str,
                 log: RunLogger, write_status) -> RunResult:
    log.event("run_started", run_id=run_id, workload=config.workload_id,
              models=[m.model_id for m in config.models])
    write_status("running", 0, 0)

    catalog_path = Path(config.catalog_path)
    if not catalog_path.is_absolute():
        catalog_path = workdir / catalog_path
    catalog = Catalog.load(catalog_path)
    store = WorkloadStore(workdir)
    workload = store.load(config.workload_id, config.workload_version,
                          catalog=catalog)
    log.event("workload_loaded", workload=workload.workload_id,
              version=workload.version, size=len(workload))

    if config.alignment_target:
        target = TargetDistribution.from_dict(config.alignment_target)
        workload = align_workload(workload, target, seed=config.seed)
        log.event("workload_aligned", workload=workload.workload_id,
                  size=len(workload))

    db_ids = sorted({dp.db_id for dp in workload.data_points})
    db_paths: dict[tuple[str, int], Path] = {}
    for db_id in db_ids:
        source = catalog.get(db_id).path
        for factor in config.scale_factors:
            if factor > 1:
                log.event("scaling_database", db=db_id, factor=factor)
            db_paths[(db_id, factor)] = ensure_scaled(
                source, workdir, db_id, factor=factor, seed=config.seed)
    if any(f > 1 for f in config.scale_factors):
        log.event("scaling_done", factors=list(config.scale_factors))

    schemas: dict[str, str] = {}
    schema_columns: dict[str, dict] = {}
    for db_id in db_ids:
        info = introspect_schema(catalog.get(db_id).path)
        schemas[db_id] = schema_text(info)
        schema_columns[db_id] = info.column_map()

    cache_dir = (workdir / "cache") if config.cache else None
    gateways = {spec.model_id: GatewayService(spec, cache_dir=cache_dir)
                for spec in config.models}

    policy = ComparisonPolicy()
    want_timing = "ETC" in config.metrics
    gen_memo = _OnceMap()
    gt_memo = _OnceMap()
    dps = {dp.id: dp for dp in workload.data_points}

    tasks = sorted(
        (dp.id, spec.model_id, iteration, factor)
        for dp in workload.data_points
        for spec in config.models
        for iteration in range(1, config.iterations + 1)
        for factor in config.scale_factors)
    total = len(tasks)
    completed = 0
    progress_lock = threading.Lock()
    # Completion-ordered safety net so an interrupted run still leaves its
    # finished records on disk; replaced by the canonically ordered
    # records.jsonl on success.
    partial_path = rd / "records.partial.jsonl"
    log.event("evaluation_started", tasks=total)

    def eval_task(task) -> dict:
        nonlocal completed
        dp_id, model_id, iteration, factor = task
        dp = dps[dp_id]
        record = {"dp_id": dp_id, "db_id": dp.db_id, "model_id": model_id,
                  "iteration": iteration, "scale_factor": factor,
                  "category": dp.label.category,
                  "subcategory": dp.label.code}
        try:
            gen = gen_memo.get(
                (model_id, dp_id, iteration),
                lambda: _generate(gateways[model_id], dp, iteration,
                                  schemas[dp.db_id]))
            db_path = db_paths[(dp.db_id, factor)]
            gt = gt_memo.get(
                (dp_id, factor),
                lambda: _ground_truth(dp, db_path, want_timing,
                                      config.timing_repetitions))
            evaluation = _evaluate(dp, gen, db_path, gt, config.metrics,
                                   policy, config.tau,
                                   config.timing_repetitions,
                                   schema_columns[dp.db_id])
            record["generation"] = {
                "sql_text": gen["sql_text"],
                "input_tokens": gen["input_tokens"],
                "output_tokens": gen["output_tokens"],
                "latency_ms": gen["latency_ms"],
                "cached": gen["cached"], "error": gen["error"]}
            record.update(evaluation)
        except Exception as exc:  # noqa: BLE001 - isolate data-point crashes
            log.event("task_failed", dp=dp_id, model=model_id,
                      iteration=iteration, factor=factor, error=str(exc))
            record["generation"] = {
                "sql_text": "", "input_tokens": None, "output_tokens": None,
                "latency_ms": 0.0, "cached": False, "error": str(exc)}
            record["gen_label"] = None
            record["outcomes"] = {
                m: MetricOutcome(m, None if m == "TU" else False,
                                 {"reason": f"task-crashed: {exc}"}).to_json()
                for m in config.metrics}
            record["repairs"] = []
        with progress_lock:
            completed += 1
            done = completed
            with partial_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True,
                                    separators=(",", ":")) + "\n")
            write_status("running", done, total)
        log.event("task_completed", dp=dp_id, model=model_id,
                  iteration=iteration, factor=factor, progress=done,
                  total=total)
        return record

    with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
        records = list(pool.map(eval_task, tasks))

    body = "".join(json.dumps(r, sort_keys=True, separators=(",", ":"))
                   + "\n" for r in records)
    _atomic_write_bytes(rd / "records.jsonl", body.encode())
    partial_path.unlink(missing_ok=True)
    log.event("records_persisted", count=len(records))

    run_info = {
        "workload_id": workload.workload_id,
        "workload_version": workload.version,
        "metrics": list(config.metrics),
        "iterations": config.iterations,
        "scale_factors": list(config.scale_factors),
        "seed": config.seed,
        "tau": config.tau,
        "em_mode": EM_MODE,
        "models": [{"model_id": m.model_id, "kind": m.kind,
                    "llm_id": m.llm_id, "temperature": m.temperature}
                   for m in config.models],
    }
    report = aggregate_records(records, run_info)
    report["_meta"] = {
        "gt_executions": gt_memo.computations,
        "generations": gen_memo.computations,
        "gateway": {model_id: {"calls_made": gw.calls_made,
                               "cache_hits": gw.cache_hits}
                    for model_id, gw in sorted(gateways.items())},
    }
    log.event("aggregated", models=len(report["models"]))
    return RunResult(run_id=run_id, run_dir=rd, report=report)
