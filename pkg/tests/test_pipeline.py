"""End-to-end evaluation runs against the mock adapters."""

import json

import pytest

from sqlgauge.bundled import materialize_demo
from sqlgauge.gateway import ModelSpec
from sqlgauge.pipeline import (ConfigError, RunConfig, RunNotFound,
                               load_config, load_records, load_run,
                               run_evaluation)
from sqlgauge.workload import WorkloadStore, Workload, DataPoint, Provenance
from sqlgauge.sqlast import classify, parse_sql


@pytest.fixture()
def workdir(tmp_path):
    materialize_demo(tmp_path)
    return tmp_path


def oracle_config(**overrides):
    base = dict(
        workload_id="sample_easy",
        models=[ModelSpec(model_id="oracle", kind="mock_oracle")],
        metrics=("EA", "EM", "CC", "TU"),
        iterations=1, scale_factors=(1,), seed=5, concurrency=2)
    base.update(overrides)
    return RunConfig(**base)


def test_oracle_run_end_to_end(workdir):
    result = run_evaluation(oracle_config(), workdir)
    report = result.report

    model = report["models"][0]
    assert model["overall"]["EA"]["score"] == 1.0
    assert model["overall"]["EM"]["score"] == 1.0
    assert model["overall"]["CC"]["score"] == 1.0
    assert report["totals"] == {"records": 20, "data_points": 20}

    # reproducibility: the run block describes the experiment, not the
    # execution — ids, timing and concurrency live in meta.json instead
    assert "run_id" not in report["run"]
    assert "concurrency" not in report["run"]
    meta = json.loads((result.run_dir / "meta.json").read_text())
    assert meta["run_id"] == result.run_id
    assert meta["generations"] == 20
    assert meta["gt_executions"] == 20
    assert meta["gateway"]["oracle"]["calls_made"] == 20

    status = json.loads((result.run_dir / "status.json").read_text())
    assert status["state"] == "completed"
    assert status["progress"] == {"completed": 20, "total": 20}

    # one artifact per configured metric and plot family
    plots = sorted(p.name for p in (result.run_dir / "plots").iterdir())
    for metric in ("EA", "EM", "CC", "TU"):
        assert f"model_comparison_{metric}.json" in plots
        assert f"scaling_{metric}.svg" in plots

    # the crash-safety spool is gone once records.jsonl is in place
    assert not (result.run_dir / "records.partial.jsonl").exists()


def test_records_are_sorted_and_compact(workdir):
    result = run_evaluation(oracle_config(), workdir)
    lines = (result.run_dir / "records.jsonl").read_text().splitlines()
    records = [json.loads(l) for l in lines]
    keys = [(r["dp_id"], r["model_id"], r["iteration"], r["scale_factor"])
            for r in records]
    assert keys == sorted(keys)
    assert all(": " not in l.split('"question"')[0] for l in lines[:1])
    assert load_records(workdir, result.run_id) == records


def test_generation_is_memoized_across_factors_not_iterations(workdir):
    config = oracle_config(metrics=("EA",), iterations=2,
                           scale_factors=(1, 2))
    result = run_evaluation(config, workdir)
    meta = json.loads((result.run_dir / "meta.json").read_text())
    # 20 dps x 2 iterations, shared across both factors
    assert meta["generations"] == 40
    assert meta["gateway"]["oracle"]["calls_made"] == 40
    # ground truth runs once per (dp, factor), shared across iterations
    assert meta["gt_executions"] == 40
    assert json.loads(
        (result.run_dir / "report.json").read_text())["totals"]["records"] == 80


def test_rerun_in_same_workdir_is_served_from_cache(workdir):
    first = run_evaluation(oracle_config(), workdir)
    second = run_evaluation(oracle_config(), workdir)
    assert second.run_id != first.run_id

    meta = json.loads((second.run_dir / "meta.json").read_text())
    assert meta["gateway"]["oracle"]["calls_made"] == 0
    assert meta["gateway"]["oracle"]["cache_hits"] == 20

    # scores and report bytes are unchanged; only the cached flag moves
    assert ((second.run_dir / "report.json").read_bytes()
            == (first.run_dir / "report.json").read_bytes())
    for a, b in zip(load_records(workdir, first.run_id), load_records(workdir, second.run_id)):
        a_gen, b_gen = dict(a["generation"]), dict(b["generation"])
        assert (a_gen.pop("cached"), b_gen.pop("cached")) == (False, True)
        a_gen.pop("latency_ms"), b_gen.pop("latency_ms")
        assert a_gen == b_gen


def test_run_dirs_are_never_reused(workdir):
    result = run_evaluation(oracle_config(run_id="alpha"), workdir)
    assert result.run_id == "alpha"
    with pytest.raises(ConfigError):
        run_evaluation(oracle_config(run_id="alpha"), workdir)


def test_ground_truth_failures_are_unevaluable_not_wrong(workdir):
    sql = "SELECT * FROM graduates"     # parses fine, table does not exist
    store = WorkloadStore(workdir)
    dp = DataPoint(id="bad-1", question="List graduates.", gt_sql=sql,
                   db_id="campus", split="eval",
                   provenance=Provenance(kind="seed_benchmark", name="t"),
                   label=classify(parse_sql(sql)))
    store.save(Workload(workload_id="broken", version=1, data_points=(dp,)))

    result = run_evaluation(oracle_config(workload_id="broken",
                                          metrics=("EA", "EM")), workdir)
    (record,) = load_records(workdir, result.run_id)
    assert record["outcomes"]["EA"]["value"] is None
    assert record["outcomes"]["EA"]["detail"]["reason"] == "gt-execution-failed"
    # EM needs no execution, so it still scores
    assert record["outcomes"]["EM"]["value"] is True
    cell = result.report["models"][0]["overall"]["EA"]
    assert cell == {"score": None, "support": 0, "data_points": 0}


def test_in_run_alignment_filters_the_eval_split(workdir):
    config = oracle_config(workload_id="sample_hard", metrics=("EA",),
                           alignment_target={"3": 0.5, "4": 0.5})
    result = run_evaluation(config, workdir)
    assert result.report["run"]["workload_id"].startswith(
        "sample_hard_aligned_")

    # the run must evaluate exactly the subset the aligner would pick
    from sqlgauge.datastore import Catalog
    from sqlgauge.workload import TargetDistribution, align_workload
    source = WorkloadStore(workdir).load(
        "sample_hard", catalog=Catalog.load(workdir / "catalog.json"))
    expected = align_workload(
        source, TargetDistribution.from_dict({"3": 0.5, "4": 0.5}),
        seed=config.seed)
    assert ({r["dp_id"] for r in load_records(workdir, result.run_id)}
            == {dp.id for dp in expected.data_points})
    eval_cats = {dp.label.category for dp in expected.data_points
                 if dp.split == "eval"}
    assert eval_cats == {3, 4}


def test_load_run_round_trip(workdir):
    result = run_evaluation(oracle_config(), workdir)
    loaded = load_run(workdir, result.run_id)
    assert loaded.report == result.report
    with pytest.raises(RunNotFound):
        load_run(workdir, "no-such-run")


# -- configuration ---------------------------------------------------------


def test_config_rejects_nonsense():
    with pytest.raises(ConfigError):
        oracle_config(metrics=("EA", "XX"))
    with pytest.raises(ConfigError):
        oracle_config(iterations=0)
    with pytest.raises(ConfigError):
        oracle_config(scale_factors=(10, 1))
    with pytest.raises(ConfigError):
        oracle_config(models=[])
    with pytest.raises(ConfigError):
        oracle_config(models=[ModelSpec(model_id="x", kind="mock_oracle"),
                              ModelSpec(model_id="x", kind="mock_oracle")])


def test_config_files_round_trip(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(
        "workload_id: sample_easy\n"
        "metrics: [EA, EM]\n"
        "llm_id: shared-llm\n"
        "models:\n"
        "  - model_id: a\n"
        "    kind: mock_oracle\n"
        "  - model_id: b\n"
        "    kind: mock_mutant\n"
        "    llm_id: special\n")
    config = load_config(path)
    assert config.workload_id == "sample_easy"
    assert config.metrics == ("EA", "EM")
    # the run-level llm_id is a default, not an override
    assert config.models[0].llm_id == "shared-llm"
    assert config.models[1].llm_id == "special"


def test_config_rejects_unknown_fields(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({
        "workload_id": "sample_easy", "parallelism": 4,
        "models": [{"model_id": "a", "kind": "mock_oracle"}]}))
    with pytest.raises(ConfigError):
        load_config(path)
