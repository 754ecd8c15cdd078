"""Aggregation, CSV export, and plot building from raw records."""

import pytest

from sqlgauge.reporting import (MissingMetric, PlotSpec, Series,
                                aggregate_records, build_model_comparison,
                                build_scaling, build_workload_versions,
                                export_csv, render_svg, report_bytes,
                                write_plot)


def rec(dp_id, *, model="m1", ea=True, subcat="4.2", factor=1, iteration=0,
        tu=None, latency=1.0):
    outcomes = {"EA": {"value": ea}}
    if tu is not None:
        outcomes["TU"] = {"value": tu}
    return {
        "dp_id": dp_id, "db_id": "campus", "model_id": model,
        "iteration": iteration, "scale_factor": factor,
        "category": int(subcat.split(".")[0]), "subcategory": subcat,
        "generation": {"sql_text": "SELECT 1", "latency_ms": latency,
                       "cached": False, "error": None},
        "gen_label": "1.1",
        "outcomes": outcomes,
        "repairs": [],
    }


def info(metrics=("EA",)):
    return {"workload_id": "w", "workload_version": 1,
            "metrics": list(metrics), "iterations": 1, "scale_factors": [1],
            "seed": 0, "tau": 1.0, "em_mode": "spider_compatible",
            "models": [{"model_id": "m1", "kind": "mock_oracle"}]}


def test_subcategory_score_is_successes_over_support():
    records = [rec(f"dp{i}", ea=(i < 4)) for i in range(10)]
    report = aggregate_records(records, info())
    cell = report["models"][0]["by_subcategory"]["EA"]["4.2"]
    assert cell == {"score": 0.4, "support": 10, "data_points": 10}


def test_unevaluable_outcomes_do_not_count_as_failures():
    records = [rec("a", ea=True), rec("b", ea=None), rec("c", ea=False)]
    cell = aggregate_records(records, info())["models"][0]["overall"]["EA"]
    assert cell == {"score": 0.5, "support": 2, "data_points": 2}


def test_support_counts_records_and_data_points_separately():
    records = [rec("a", iteration=0), rec("a", iteration=1),
               rec("b", ea=False)]
    cell = aggregate_records(records, info())["models"][0]["overall"]["EA"]
    assert cell["support"] == 3
    assert cell["data_points"] == 2


def test_overall_is_the_support_weighted_mean_of_categories():
    records = ([rec(f"x{i}", subcat="1.1", ea=True) for i in range(3)]
               + [rec("y", subcat="4.2", ea=False)])
    model = aggregate_records(records, info())["models"][0]
    by_cat = model["by_category"]["EA"]
    weighted = sum(c["score"] * c["support"] for c in by_cat.values())
    total = sum(c["support"] for c in by_cat.values())
    assert model["overall"]["EA"]["score"] == weighted / total == 0.75


def test_by_factor_table_is_factor_major():
    records = [rec("a", factor=1), rec("a", factor=10, ea=False)]
    model = aggregate_records(records, info())["models"][0]
    assert model["by_factor"]["1"]["EA"]["score"] == 1.0
    assert model["by_factor"]["10"]["EA"]["score"] == 0.0


def test_aggregation_is_byte_deterministic():
    records = [rec(f"dp{i}", ea=(i % 3 == 0), tu=100 + i) for i in range(9)]
    a = report_bytes(aggregate_records(records, info(("EA", "TU"))))
    b = report_bytes(aggregate_records(records, info(("EA", "TU"))))
    assert a == b


def test_models_are_sorted_regardless_of_record_order():
    records = [rec("a", model="zeta"), rec("a", model="alpha")]
    report = aggregate_records(records, info())
    assert [m["model_id"] for m in report["models"]] == ["alpha", "zeta"]


# -- csv ---------------------------------------------------------------------


def test_csv_row_count_matches_the_shape_formula():
    records = ([rec(f"a{i}", subcat="1.1") for i in range(2)]
               + [rec("b", subcat="4.2")]
               + [rec("c", model="m2", subcat="4.3", ea=False)])
    report = aggregate_records(records, info(("EA", "TU")))
    lines = export_csv(report).strip().splitlines()
    header, rows = lines[0], lines[1:]
    assert header == "model,metric,level,group,score,support"
    # per model: metrics x (overall + its categories + its subcategories)
    m1 = 2 * (1 + 2 + 2)   # categories {1,4}, subcategories {1.1, 4.2}
    m2 = 2 * (1 + 1 + 1)
    assert len(rows) == m1 + m2


def test_csv_empty_scores_stay_blank():
    report = aggregate_records([rec("a", ea=None)], info())
    lines = export_csv(report).strip().splitlines()
    overall = next(l for l in lines if ",overall," in l)
    assert overall == "m1,EA,overall,,,0"


def test_csv_spot_row():
    report = aggregate_records(
        [rec(f"d{i}", ea=(i < 2)) for i in range(5)], info())
    lines = export_csv(report).strip().splitlines()
    assert "m1,EA,subcategory,4.2,0.4,5" in lines


# -- plot builders -------------------------------------------------------------


def report_with(scores, model="m1", metrics=("EA",)):
    """scores: {subcat: (true_count, total)}"""
    records = []
    for subcat, (hits, total) in scores.items():
        for i in range(total):
            records.append(rec(f"{subcat}-{i}", model=model, subcat=subcat,
                               ea=(i < hits)))
    return aggregate_records(records, info(metrics))


def test_model_comparison_groups_overall_plus_subcategories():
    spec = build_model_comparison(
        [report_with({"1.1": (1, 2), "4.2": (0, 1)})], "EA")
    assert spec.groups == ("overall", "1.1", "4.2")
    (series,) = spec.series
    assert series.label == "m1"
    assert series.y == (pytest.approx(1 / 3), 0.5, 0.0)


def test_model_comparison_disambiguates_repeated_model_ids():
    a = report_with({"1.1": (1, 1)})
    b = report_with({"1.1": (0, 1)})
    b["run"]["run_id"] = "r2"
    spec = build_model_comparison([a, b], "EA")
    labels = [s.label for s in spec.series]
    assert labels[0] == "m1"
    assert labels[1] == "m1 (r2)"


def test_plots_require_the_metric():
    with pytest.raises(MissingMetric):
        build_model_comparison([report_with({"1.1": (1, 1)})], "ETC")
    with pytest.raises(MissingMetric):
        build_scaling(report_with({"1.1": (1, 1)}), "ETC")


def test_workload_versions_keeps_sparse_versions_in_order():
    reports = {3: report_with({"1.1": (1, 1)}),
               1: report_with({"1.1": (0, 1)})}
    spec = build_workload_versions(reports, "EA")
    (series,) = spec.series
    assert series.x == (1, 3)
    assert series.y == (0.0, 1.0)


def test_workload_versions_gap_for_absent_models():
    v1 = report_with({"1.1": (1, 1)})
    v2_records = [rec("a", model="m1"), rec("a", model="m2", ea=False)]
    v2 = aggregate_records(v2_records, info())
    spec = build_workload_versions({1: v1, 2: v2}, "EA")
    by_label = {s.label: s for s in spec.series}
    assert by_label["m2"].y == (None, 0.0)


def scaling_report(factors):
    records = [rec("a", factor=f) for f in factors]
    return aggregate_records(records, info())


def test_scaling_axis_goes_log_only_across_two_decades():
    assert build_scaling(scaling_report([1, 10]), "EA").x_scale == "linear"
    assert build_scaling(scaling_report([1, 10, 100]), "EA").x_scale == "log"
    spec = build_scaling(scaling_report([10, 1, 100]), "EA")
    (series,) = spec.series
    assert series.x == (1, 10, 100)


def test_plot_spec_validation():
    with pytest.raises(ValueError):
        PlotSpec(kind="pie", metric="EA", title="", x_label="", y_label="",
                 series=())
    with pytest.raises(ValueError):
        PlotSpec(kind="scaling", metric="EA", title="", x_label="",
                 y_label="", series=(Series("s", (1, 2), (1.0,)),))


# -- svg ------------------------------------------------------------------------


def test_svg_rendering_is_deterministic_and_escaped():
    spec = build_model_comparison(
        [report_with({"1.1": (1, 2)}, model="a<b&c")], "EA")
    svg = render_svg(spec)
    assert svg == render_svg(spec)
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert "a&lt;b&amp;c" in svg
    assert "a<b&c" not in svg


def test_write_plot_emits_json_and_svg(tmp_path):
    spec = build_scaling(scaling_report([1, 10]), "EA")
    svg_path, json_path = write_plot(spec, tmp_path)
    assert json_path.name == "scaling_EA.json"
    assert svg_path.name == "scaling_EA.svg"
    assert json_path.read_text().startswith("{")
    assert "<svg" in svg_path.read_text()
