"""Command-line entry point.

Verbs cover the whole workflow: run evaluations, classify single
statements, diff a generated query against a reference, scale databases,
align or augment workloads, dump reports, and boot the HTTP service.

Conventions: machine-readable output goes to stdout, progress and
diagnostics to stderr.  Exit 0 on success, 1 on validation/usage errors,
2 on runtime failures.  The working directory holding catalog.json,
workloads/, and runs/ comes from --workdir, or the SQLGAUGE_WORKDIR
environment variable, or the current directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from .datastore import (Catalog, CatalogError, DbConnectError, ExecError,
                        ScalingError, ensure_scaled, execute_query)
from .gateway import AdapterError, GatewayService
from .metrics import ComparisonPolicy, exact_match_metric, execution_accuracy
from .pipeline import (ConfigError, RunConfig, RunNotFound, load_config,
                       load_run, run_evaluation)
from .repair import suggest_repairs
from .reporting import (MissingMetric, build_model_comparison, build_scaling,
                        export_csv, write_plot)
from .sqlast import SqlAstError, classify, parse_sql
from .workload import (TargetDistribution, WorkloadError, WorkloadStore,
                       align_workload, augment_workload,
                       select_weak_subcategories)

WORKDIR_ENV = "SQLGAUGE_WORKDIR"


class _UsageError(Exception):
    pass


_VALIDATION_ERRORS = (ConfigError, CatalogError, WorkloadError, SqlAstError,
                      MissingMetric, RunNotFound, _UsageError, ValueError)
_RUNTIME_ERRORS = (ExecError, DbConnectError, ScalingError, AdapterError,
                   OSError)


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems instead of exiting with 2."""

    def error(self, message):
        raise _UsageError(message)


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _workdir(args) -> Path:
    return Path(args.workdir or os.environ.get(WORKDIR_ENV) or ".")


def _catalog(workdir: Path) -> Catalog:
    return Catalog.load(workdir / "catalog.json")


def _read_sql(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    return Path(source).read_text(encoding="utf-8")


def _cmd_run(args) -> int:
    config = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["concurrency"] = args.workers
    if args.run_id:
        overrides["run_id"] = args.run_id
    if overrides:
        config = dataclasses.replace(config, **overrides)
    workdir = _workdir(args)
    _say(f"running workload {config.workload_id!r} with "
         f"{len(config.models)} model(s) in {workdir}")
    try:
        result = run_evaluation(config, workdir)
    except KeyboardInterrupt:
        _say("interrupted; completed records are kept under the run "
             "directory as records.partial.jsonl")
        return 130
    for model in result.report["models"]:
        scores = {m: cell["score"] for m, cell in model["overall"].items()}
        _say(f"  {model['model_id']}: " + ", ".join(
            f"{m}={s}" for m, s in sorted(scores.items())))
    print(json.dumps({"run_id": result.run_id,
                      "run_dir": str(result.run_dir)}))
    return 0


def _cmd_classify(args) -> int:
    if args.dialect != "sqlite":
        raise _UsageError(f"unsupported dialect: {args.dialect!r}")
    sql = _read_sql(args.sql_file)
    label = classify(parse_sql(sql))
    print(f"c{label.category} {label.code}")
    return 0


def _cmd_compare(args) -> int:
    workdir = _workdir(args)
    catalog = _catalog(workdir)
    db_path = catalog.get(args.db).path
    gen_sql = _read_sql(args.gen)
    gt_sql = _read_sql(args.gt)
    gt_ast = parse_sql(gt_sql)
    mode = {"spider": "spider_compatible", "strict": "strict"}[args.mode]

    em = exact_match_metric(gen_sql, gt_ast, mode=mode)
    policy = ComparisonPolicy()
    gt_table = execute_query(db_path, gt_sql)
    try:
        gen_table = execute_query(db_path, gen_sql)
        gen_error = None
    except ExecError as exc:
        gen_table, gen_error = None, str(exc)
    ea = execution_accuracy(gen_table, gt_table, policy, error=gen_error)

    out = {"db": args.db, "mode": args.mode,
           "em": em.to_json(), "ea": ea.to_json(), "repairs": []}
    if ea.value is False and gen_table is not None:
        out["repairs"] = [s.to_json()
                          for s in suggest_repairs(gen_table, gt_table, policy)]
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def _cmd_scale(args) -> int:
    if args.factor < 1:
        raise _UsageError(f"--factor must be >= 1, got {args.factor}")
    workdir = _workdir(args)
    catalog = _catalog(workdir)
    source = catalog.get(args.db).path
    _say(f"scaling {args.db} by x{args.factor} (seed {args.seed})")
    path = ensure_scaled(source, workdir, args.db,
                         factor=args.factor, seed=args.seed)
    print(path)
    return 0


def _cmd_align(args) -> int:
    workdir = _workdir(args)
    store = WorkloadStore(workdir)
    workload = store.load(args.workload, catalog=_catalog(workdir))
    target = TargetDistribution.from_file(args.target)
    aligned = align_workload(workload, target, seed=args.seed)
    store.save(aligned, note=f"aligned from {args.workload} "
                             f"v{workload.version}, seed {args.seed}")
    _say(f"aligned {len(workload)} -> {len(aligned)} data points")
    print(json.dumps({"workload_id": aligned.workload_id,
                      "version": aligned.version, "size": len(aligned)}))
    return 0


def _cmd_augment(args) -> int:
    workdir = _workdir(args)
    run = load_run(workdir, args.run)
    run_config = json.loads((run.run_dir / "config.json").read_text())
    config = RunConfig.from_dict(run_config)

    weak = select_weak_subcategories(run.report, metric=args.metric,
                                     theta=args.threshold,
                                     min_support=args.min_support)
    if not weak:
        raise WorkloadError(
            f"no weak subcategories below {args.metric} {args.threshold}")
    weak = sorted(weak)
    _say(f"weak subcategories: {', '.join(weak)}")

    by_id = {m.model_id: m for m in config.models}
    generator = by_id.get(args.model or config.models[0].model_id)
    if generator is None:
        raise _UsageError(f"run {args.run} has no model {args.model!r} "
                          f"(choose from {sorted(by_id)})")

    catalog = _catalog(workdir)
    store = WorkloadStore(workdir)
    workload = store.load(config.workload_id, catalog=catalog)
    cache_dir = (workdir / "cache") if config.cache else None
    gateway = GatewayService(generator, cache_dir=cache_dir)
    outcome = augment_workload(workload, weak, args.per_subcat, gateway,
                               catalog, seed=args.seed, run_id=args.run)
    n_accepted = sum(len(v) for v in outcome.accepted.values())
    for subcat in weak:
        _say(f"  {subcat}: +{len(outcome.accepted.get(subcat, []))} "
             f"(short {outcome.shortfall.get(subcat, 0)})")
    saved_version = workload.version
    if n_accepted:
        store.save(outcome.workload,
                   note=f"augmented after run {args.run} with "
                        f"{generator.model_id}: +{n_accepted} data points "
                        f"across {len(weak)} weak subcategories")
        saved_version = outcome.workload.version
    else:
        _say("nothing accepted; workload left unchanged")
    print(json.dumps({"workload_id": workload.workload_id,
                      "version": saved_version,
                      "accepted": n_accepted,
                      "shortfall": outcome.shortfall}))
    return 0


def _cmd_report(args) -> int:
    workdir = _workdir(args)
    run = load_run(workdir, args.run)
    if args.plots:
        plots_dir = run.run_dir / "plots"
        for metric in run.report["run"]["metrics"]:
            for spec in (build_model_comparison([run.report], metric),
                         build_scaling(run.report, metric)):
                svg, _ = write_plot(spec, plots_dir)
                _say(str(svg))
    if args.format == "csv":
        sys.stdout.write(export_csv(run.report))
    else:
        sys.stdout.write(json.dumps(run.report, indent=2, sort_keys=True)
                         + "\n")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    app = create_app(_workdir(args), ui_dir=args.ui or None)
    _say(f"serving on http://{args.host}:{args.port} "
         f"(workdir {_workdir(args)})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="sqlgauge",
                     description="Benchmark SQL-generating models.")
    sub = parser.add_subparsers(dest="verb", metavar="<verb>")

    def add(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        p.add_argument("--workdir", default="",
                       help=f"working directory (default ${WORKDIR_ENV} or .)")
        return p

    p = add("run", _cmd_run, "execute an evaluation run from a config file")
    p.add_argument("--config", required=True, help="JSON or YAML run config")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None,
                   help="override worker pool size")
    p.add_argument("--run-id", default="", help="explicit run identifier")

    p = add("classify", _cmd_classify,
            "print the taxonomy label of one SQL statement")
    p.add_argument("sql_file", metavar="sql-file",
                   help="path to a SQL file, or - for stdin")
    p.add_argument("--dialect", default="sqlite")

    p = add("compare", _cmd_compare,
            "score one generated query against a reference")
    p.add_argument("--gen", required=True, help="generated SQL file")
    p.add_argument("--gt", required=True, help="reference SQL file")
    p.add_argument("--db", required=True, help="database id from the catalog")
    p.add_argument("--mode", choices=("spider", "strict"), default="spider")

    p = add("scale", _cmd_scale, "materialize a scaled copy of a database")
    p.add_argument("--db", required=True)
    p.add_argument("--factor", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = add("align", _cmd_align,
            "derive a workload matching a target category mix")
    p.add_argument("--workload", required=True)
    p.add_argument("--target", required=True,
                   help="JSON file with category weights")
    p.add_argument("--seed", type=int, default=0)

    p = add("augment", _cmd_augment,
            "generate data points for a run's weak subcategories")
    p.add_argument("--run", required=True, help="completed run id")
    p.add_argument("--threshold", type=float, required=True,
                   help="score below which a subcategory is weak")
    p.add_argument("--per-subcat", type=int, required=True,
                   help="new data points per weak subcategory")
    p.add_argument("--metric", default="EA")
    p.add_argument("--min-support", type=int, default=3)
    p.add_argument("--model", default="",
                   help="which of the run's models generates candidates "
                        "(default: the first)")
    p.add_argument("--seed", type=int, default=0)

    p = add("report", _cmd_report, "print a run's aggregated report")
    p.add_argument("--run", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--plots", action="store_true",
                   help="also (re)write the run's SVG plots")

    p = add("serve", _cmd_serve, "start the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", default="",
                   help="directory with a built dashboard to serve at /ui")

    return parser


def dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "handler", None):
            parser.print_help(sys.stderr)
            return 1
        return args.handler(args)
    except _VALIDATION_ERRORS as exc:
        if isinstance(exc, _UsageError):
            parser.print_help(sys.stderr)
        _say(f"error: {exc}")
        return 1
    except _RUNTIME_ERRORS as exc:
        _say(f"error: {exc}")
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
