"""The command-line interface, driven in-process through dispatch()."""

import io
import json

import pytest

from sqlgauge.bundled import materialize_demo
from sqlgauge.cli import dispatch


@pytest.fixture()
def workdir(tmp_path):
    materialize_demo(tmp_path)
    return tmp_path


def write_config(workdir, name="run.json", **overrides):
    config = {
        "workload_id": "sample_easy",
        "metrics": ["EA", "EM"],
        "models": [{"model_id": "oracle", "kind": "mock_oracle"}],
        "seed": 9,
    }
    config.update(overrides)
    path = workdir / name
    path.write_text(json.dumps(config))
    return path


def run_cli(*argv):
    return dispatch([str(a) for a in argv])


def test_no_verb_prints_help_and_fails(capsys):
    assert run_cli() == 1
    assert "usage:" in capsys.readouterr().err


def test_unknown_verb_is_a_usage_error(capsys):
    assert run_cli("transmogrify") == 1
    assert "usage:" in capsys.readouterr().err


def test_unknown_flag_is_a_usage_error(capsys):
    assert run_cli("classify", "--bogus") == 1


# -- classify -----------------------------------------------------------------


def test_classify_prints_category_and_subcategory(tmp_path, capsys):
    sql = tmp_path / "q.sql"
    sql.write_text("SELECT count(*) FROM student")
    assert run_cli("classify", sql) == 0
    assert capsys.readouterr().out == "c2 2.1\n"


def test_classify_reads_stdin(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO("SELECT * FROM t"))
    assert run_cli("classify", "-") == 0
    assert capsys.readouterr().out == "c1 1.1\n"


def test_classify_rejects_bad_sql(tmp_path, capsys):
    sql = tmp_path / "q.sql"
    sql.write_text("SELEC oops")
    assert run_cli("classify", sql) == 1
    assert "error:" in capsys.readouterr().err


def test_classify_rejects_unknown_dialect(tmp_path, capsys):
    sql = tmp_path / "q.sql"
    sql.write_text("SELECT 1")
    assert run_cli("classify", sql, "--dialect", "klingon") == 1


# -- run ------------------------------------------------------------------------


def test_run_emits_run_id_on_stdout(workdir, capsys):
    config = write_config(workdir)
    assert run_cli("run", "--config", config, "--workdir", workdir,
                   "--run-id", "cli-test") == 0
    captured = capsys.readouterr()
    out = json.loads(captured.out)
    assert out["run_id"] == "cli-test"
    assert (workdir / "runs" / "cli-test" / "report.json").is_file()
    assert "oracle" in captured.err      # progress goes to stderr


def test_run_refuses_to_overwrite_a_run(workdir, capsys):
    config = write_config(workdir)
    assert run_cli("run", "--config", config, "--workdir", workdir,
                   "--run-id", "dup") == 0
    assert run_cli("run", "--config", config, "--workdir", workdir,
                   "--run-id", "dup") == 1


def test_run_rejects_a_broken_config(workdir, capsys):
    config = write_config(workdir, metrics=["EA", "NOPE"])
    assert run_cli("run", "--config", config, "--workdir", workdir) == 1


def test_workdir_can_come_from_the_environment(workdir, capsys, monkeypatch):
    monkeypatch.setenv("SQLGAUGE_WORKDIR", str(workdir))
    config = write_config(workdir)
    assert run_cli("run", "--config", config, "--run-id", "env-run") == 0
    assert (workdir / "runs" / "env-run" / "report.json").is_file()


# -- compare ----------------------------------------------------------------------


def sql_file(tmp_path, name, sql):
    path = tmp_path / name
    path.write_text(sql)
    return path


def test_compare_scores_a_pair(workdir, tmp_path, capsys):
    gen = sql_file(tmp_path, "gen.sql",
                   "SELECT title FROM course WHERE credits > 3")
    gt = sql_file(tmp_path, "gt.sql",
                  "SELECT title FROM course WHERE credits > 2")
    assert run_cli("compare", "--gen", gen, "--gt", gt, "--db", "campus",
                   "--workdir", workdir) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["em"]["value"] is True          # spider mode masks literals
    assert out["ea"]["value"] is False         # but the rows really differ
    assert out["mode"] == "spider"


def test_compare_strict_mode_sees_the_literal(workdir, tmp_path, capsys):
    gen = sql_file(tmp_path, "gen.sql", "SELECT title FROM course WHERE credits > 3")
    gt = sql_file(tmp_path, "gt.sql", "SELECT title FROM course WHERE credits > 2")
    assert run_cli("compare", "--gen", gen, "--gt", gt, "--db", "campus",
                   "--mode", "strict", "--workdir", workdir) == 0
    assert json.loads(capsys.readouterr().out)["em"]["value"] is False


def test_compare_suggests_repairs_for_near_misses(workdir, tmp_path, capsys):
    gen = sql_file(tmp_path, "gen.sql", "SELECT title, id FROM course")
    gt = sql_file(tmp_path, "gt.sql", "SELECT id, title FROM course")
    assert run_cli("compare", "--gen", gen, "--gt", gt, "--db", "campus",
                   "--workdir", workdir) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ea"]["value"] is False
    assert out["repairs"] == [["column_reorder"]]


def test_compare_unknown_db_is_a_validation_error(workdir, tmp_path, capsys):
    gen = sql_file(tmp_path, "gen.sql", "SELECT 1")
    assert run_cli("compare", "--gen", gen, "--gt", gen, "--db", "nope",
                   "--workdir", workdir) == 1


def test_compare_broken_reference_is_a_runtime_error(workdir, tmp_path,
                                                     capsys):
    gen = sql_file(tmp_path, "gen.sql", "SELECT 1")
    gt = sql_file(tmp_path, "gt.sql", "SELECT x FROM missing_table")
    assert run_cli("compare", "--gen", gen, "--gt", gt, "--db", "campus",
                   "--workdir", workdir) == 2


# -- scale --------------------------------------------------------------------------


def test_scale_materializes_a_copy(workdir, capsys):
    assert run_cli("scale", "--db", "retail", "--factor", 2,
                   "--workdir", workdir) == 0
    path = capsys.readouterr().out.strip()
    assert path.endswith("retail.sqlite")
    assert (workdir / "scaled" / "retail_x2" / "retail.sqlite").is_file()


def test_scale_rejects_factor_zero(workdir, capsys):
    assert run_cli("scale", "--db", "retail", "--factor", 0,
                   "--workdir", workdir) == 1


# -- align / augment ------------------------------------------------------------------


def test_align_saves_a_derived_workload(workdir, tmp_path, capsys):
    target = tmp_path / "target.json"
    target.write_text(json.dumps({"1": 0.6, "2": 0.4}))
    assert run_cli("align", "--workload", "sample_easy", "--target", target,
                   "--workdir", workdir) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["workload_id"].startswith("sample_easy_aligned_")
    assert out["version"] == 1
    listing = json.loads((workdir / "workloads" / out["workload_id"]
                          / "meta.json").read_text())
    assert listing["latest_version"] == 1


def test_align_shrinks_to_fit_a_narrow_target(workdir, tmp_path, capsys):
    # sample_easy has a single 5.x eval point, so the best this target can
    # do is one eval point (the four train points tag along untouched).
    target = tmp_path / "target.json"
    target.write_text(json.dumps({"5": 1.0}))
    assert run_cli("align", "--workload", "sample_easy", "--target", target,
                   "--workdir", workdir) == 0
    assert json.loads(capsys.readouterr().out)["size"] == 5


def test_align_infeasible_target_fails_cleanly(workdir, tmp_path, capsys):
    # sample_hard has no category-1 eval points at all.
    target = tmp_path / "target.json"
    target.write_text(json.dumps({"1": 0.5, "2": 0.5}))
    assert run_cli("align", "--workload", "sample_hard", "--target", target,
                   "--workdir", workdir) == 1
    assert "no eval data points" in capsys.readouterr().err


def test_augment_extends_the_workload(workdir, capsys):
    config = write_config(
        workdir, metrics=["EA"],
        models=[{"model_id": "chaos", "kind": "mock_mutant",
                 "options": {"mutation": "column_swap"}},
                {"model_id": "writer", "kind": "mock_template"}])
    assert run_cli("run", "--config", config, "--workdir", workdir,
                   "--run-id", "for-augment") == 0
    capsys.readouterr()

    code = run_cli("augment", "--run", "for-augment", "--threshold", "0.9",
                   "--per-subcat", "1", "--min-support", "1",
                   "--model", "writer", "--workdir", workdir)
    captured = capsys.readouterr()
    assert code == 0
    out = json.loads(captured.out)
    assert out["workload_id"] == "sample_easy"
    assert out["accepted"] > 0
    assert out["version"] == 2


def test_augment_unknown_run_is_a_validation_error(workdir, capsys):
    assert run_cli("augment", "--run", "ghost", "--threshold", "0.5",
                   "--per-subcat", "1", "--workdir", workdir) == 1


# -- report -------------------------------------------------------------------------


@pytest.fixture()
def completed_run(workdir):
    config = write_config(workdir)
    assert dispatch(["run", "--config", str(config), "--workdir",
                     str(workdir), "--run-id", "done"]) == 0
    return workdir


def test_report_json(completed_run, capsys):
    capsys.readouterr()
    assert run_cli("report", "--run", "done",
                   "--workdir", completed_run) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["models"][0]["overall"]["EA"]["score"] == 1.0


def test_report_csv(completed_run, capsys):
    capsys.readouterr()
    assert run_cli("report", "--run", "done", "--format", "csv",
                   "--workdir", completed_run) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "model,metric,level,group,score,support"
    assert len(lines) > 1


def test_report_unknown_run(workdir, capsys):
    assert run_cli("report", "--run", "ghost", "--workdir", workdir) == 1
