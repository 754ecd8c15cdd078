#!/usr/bin/env python3
"""End-to-end tour on the bundled demo data.

Evaluates a perfect mock model next to one that swaps SELECT columns,
prints the leaderboard with its repair hints, then closes the loop:
weak subcategories are detected, the workload is augmented with fresh
validated data points, and the new version is evaluated again.

Everything is deterministic and offline; runtime is a few seconds.
"""

import argparse
import json
from pathlib import Path

from sqlgauge.bundled import materialize_demo
from sqlgauge.datastore import Catalog
from sqlgauge.gateway import GatewayService, ModelSpec
from sqlgauge.pipeline import RunConfig, load_records, run_evaluation
from sqlgauge.workload import (WorkloadStore, augment_workload,
                               select_weak_subcategories)

MODELS = [
    {"model_id": "oracle", "kind": "mock_oracle"},
    {"model_id": "swapper", "kind": "mock_mutant",
     "options": {"mutation": "column_swap"}},
]


def show_report(report: dict, metrics) -> None:
    for model in report["models"]:
        overall = " ".join(
            f"{m}={model['overall'][m]['score']:.2f}" for m in metrics
            if model["overall"][m]["score"] is not None)
        print(f"  {model['model_id']:8s} {overall}")
        cells = model["by_subcategory"]["EA"]
        worst = sorted((c for c in cells if cells[c]["score"] is not None),
                       key=lambda c: cells[c]["score"])[:3]
        for code in worst:
            cell = cells[code]
            print(f"    weakest {code}: EA={cell['score']:.2f} "
                  f"over {cell['support']} points")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("workdir", nargs="?", default="demo-run", type=Path)
    ap.add_argument("--threshold", type=float, default=0.9,
                    help="EA below this marks a subcategory weak")
    ap.add_argument("--per-subcat", type=int, default=2,
                    help="new data points to add per weak subcategory")
    args = ap.parse_args()

    if not (args.workdir / "catalog.json").exists():
        materialize_demo(args.workdir)
        print(f"materialized demo data in {args.workdir}/")

    metrics = ["EA", "EM", "CC", "TU"]
    config = RunConfig.from_dict({
        "workload_id": "sample_easy", "metrics": metrics,
        "models": MODELS, "seed": 7, "run_id": "before-augment",
    })
    print("\nevaluating sample_easy v1 ...")
    result = run_evaluation(config, args.workdir)
    report = result.report
    show_report(report, metrics)

    hinted = [r for r in load_records(args.workdir, "before-augment")
              if r["repairs"]]
    print(f"\n{len(hinted)} failing records carry repair hints, e.g.:")
    for record in hinted[:3]:
        print(f"  {record['dp_id']} ({record['model_id']}): "
              f"{' -> '.join(record['repairs'][0])}")

    weak = select_weak_subcategories(report, metric="EA",
                                     theta=args.threshold, min_support=1)
    print(f"\nsubcategories below EA {args.threshold}: {sorted(weak)}")
    if not weak:
        print("nothing to augment; done")
        return

    catalog = Catalog.load(args.workdir / "catalog.json")
    store = WorkloadStore(args.workdir)
    base = store.load("sample_easy", catalog=catalog)
    writer = GatewayService(ModelSpec(model_id="writer",
                                      kind="mock_template"))
    outcome = augment_workload(base, weak, args.per_subcat, writer, catalog,
                               seed=7, run_id="before-augment")
    accepted = sum(len(v) for v in outcome.accepted.values())
    if not accepted:
        print("the template bank had nothing new to offer; done")
        return
    store.save(outcome.workload, note="demo augmentation")
    print(f"accepted {accepted} new data points -> sample_easy "
          f"v{outcome.workload.version}")
    if outcome.shortfall:
        print(f"  shortfall: {outcome.shortfall}")

    config = RunConfig.from_dict({
        "workload_id": "sample_easy", "metrics": metrics,
        "models": MODELS, "seed": 7, "run_id": "after-augment",
        "workload_version": outcome.workload.version,
    })
    print(f"\nevaluating sample_easy v{outcome.workload.version} ...")
    result = run_evaluation(config, args.workdir)
    show_report(result.report, metrics)

    plots = result.run_dir / "plots"
    print(f"\nreports: {result.run_dir}/report.json")
    print(f"plots:   {sorted(p.name for p in plots.glob('*.svg'))}")


if __name__ == "__main__":
    main()
