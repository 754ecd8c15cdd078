"""Bundled demo assets: databases, a labeled query corpus, sample workloads.

``materialize_demo(workdir)`` lays out a ready-to-use working directory:

    <workdir>/dbs/campus.sqlite
    <workdir>/dbs/retail.sqlite
    <workdir>/catalog.json
    <workdir>/workloads/sample_easy/v1.jsonl   (+ meta.json; same for
                                                sample_medium, sample_hard)

The corpus (``corpus72.jsonl``) carries two hand-labeled queries per
taxonomy subcategory and stays a package resource; tests read it through
``load_corpus()``.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .demo_db import build_campus_db, build_retail_db

SAMPLE_WORKLOAD_IDS = ("sample_easy", "sample_medium", "sample_hard")


def _resource_text(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text(encoding="utf-8")


def load_corpus() -> list[dict]:
    """Rows of the hand-labeled classifier corpus."""
    lines = _resource_text("corpus72.jsonl").splitlines()
    return [json.loads(line) for line in lines if line.strip()]


def load_sample_workload(workload_id: str) -> list[dict]:
    if workload_id not in SAMPLE_WORKLOAD_IDS:
        raise KeyError(f"unknown sample workload: {workload_id}")
    lines = _resource_text(f"{workload_id}.jsonl").splitlines()
    return [json.loads(line) for line in lines if line.strip()]


def load_target_distribution() -> dict[str, float]:
    """Category weights of the bundled production-style target mix."""
    return json.loads(_resource_text("target_distribution.json"))["weights"]


def materialize_demo(workdir: str | Path) -> Path:
    """Create demo databases, catalog, and workload stores under *workdir*."""
    root = Path(workdir)
    dbs = root / "dbs"
    dbs.mkdir(parents=True, exist_ok=True)
    build_campus_db(str(dbs / "campus.sqlite"))
    build_retail_db(str(dbs / "retail.sqlite"))

    catalog = {
        "version": 1,
        "databases": {
            "campus": {"engine": "sqlite", "path": "dbs/campus.sqlite"},
            "retail": {"engine": "sqlite", "path": "dbs/retail.sqlite"},
        },
    }
    (root / "catalog.json").write_text(
        json.dumps(catalog, indent=2) + "\n", encoding="utf-8")

    for wl_id in SAMPLE_WORKLOAD_IDS:
        wl_dir = root / "workloads" / wl_id
        wl_dir.mkdir(parents=True, exist_ok=True)
        (wl_dir / "v1.jsonl").write_text(
            _resource_text(f"{wl_id}.jsonl"), encoding="utf-8")
        meta = {"workload_id": wl_id, "latest_version": 1,
                "versions": {"1": {"parent_version": None, "note": "bundled"}}}
        (wl_dir / "meta.json").write_text(
            json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return root
