#!/usr/bin/env python3
"""Materialize a demo working directory.

Creates two small sqlite databases (a campus registrar and a retail
shop), a catalog.json pointing at them, and three versioned 20-point
workloads (sample_easy / sample_medium / sample_hard). The directory is
everything `sqlgauge run` and `sqlgauge serve` need.
"""

import argparse
import json
from pathlib import Path

from sqlgauge.bundled import materialize_demo
from sqlgauge.datastore import Catalog, introspect_schema
from sqlgauge.workload import WorkloadStore


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("workdir", nargs="?", default="demo", type=Path,
                    help="directory to create (default: ./demo)")
    args = ap.parse_args()

    if (args.workdir / "catalog.json").exists():
        raise SystemExit(f"{args.workdir} already holds a catalog; "
                         "pick a fresh directory")
    materialize_demo(args.workdir)

    catalog = Catalog.load(args.workdir / "catalog.json")
    print(f"demo working directory: {args.workdir.resolve()}")
    for db_id in sorted(catalog.databases):
        schema = introspect_schema(catalog.get(db_id).path)
        tables = ", ".join(sorted(schema.tables))
        print(f"  db {db_id}: {tables}")
    store = WorkloadStore(args.workdir)
    for wl_id in store.ids():
        workload = store.load(wl_id)
        print(f"  workload {wl_id}: {len(workload.data_points)} data points "
              f"(v{workload.version})")
    print("\nnext:")
    print(f"  sqlgauge run --workdir {args.workdir} --config <run.yaml>")
    print(f"  sqlgauge serve --workdir {args.workdir} --port 8080")


if __name__ == "__main__":
    main()
