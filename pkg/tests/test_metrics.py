"""Metric semantics, mostly against hand-built result tables."""

import math

import pytest
from hypothesis import given, strategies as st

from sqlgauge.datastore.executor import ResultTable, TimingStats
from sqlgauge.metrics import (ComparisonPolicy, classification_consistency,
                              compare_result_tables, efficiency_within_tolerance,
                              exact_match_metric, execution_accuracy,
                              token_usage)
from sqlgauge.sqlast import parse_sql


def table(rows, *, ordered=False, columns=None):
    width = len(rows[0]) if rows else 0
    cols = tuple(columns) if columns else tuple(f"c{i}" for i in range(width))
    return ResultTable(columns=cols, rows=tuple(tuple(r) for r in rows),
                       ordered=ordered, truncated=False)


cell = st.one_of(st.none(), st.integers(-50, 50),
                 st.floats(-10, 10, allow_nan=False, width=32),
                 st.text(max_size=4))


# -- execution accuracy ---------------------------------------------------


@given(st.lists(st.tuples(cell, cell), max_size=12), st.randoms())
def test_ea_unordered_compare_is_permutation_invariant(rows, rng):
    shuffled = list(rows)
    rng.shuffle(shuffled)
    equal, _ = compare_result_tables(table(shuffled or [()]),
                                     table(rows or [()]))
    assert equal


def test_ea_respects_gt_row_order():
    ref = table([(1,), (2,)], ordered=True)
    assert execution_accuracy(table([(2,), (1,)]), ref).value is False
    assert execution_accuracy(table([(1,), (2,)]), ref).value is True


def test_ea_unordered_gt_accepts_any_row_order():
    ref = table([(1,), (2,)], ordered=False)
    assert execution_accuracy(table([(2,), (1,)]), ref).value is True


def test_ea_is_multiset_not_set():
    equal, reason = compare_result_tables(table([(1,), (1,), (2,)]),
                                          table([(1,), (2,), (2,)]))
    assert not equal and reason == "bag-mismatch"


def test_ea_mismatch_reasons():
    ref = table([(1, 2)])
    assert execution_accuracy(table([(1,)]), ref).detail["reason"] == "column-count"
    assert execution_accuracy(table([(1, 2), (3, 4)]), ref).detail["reason"] == "row-count"


def test_ea_ignores_column_names():
    equal, _ = compare_result_tables(table([(1,)], columns=["a"]),
                                     table([(1,)], columns=["b"]))
    assert equal


def test_ea_float_tolerance():
    # default rel_tol is 1e-6, so the break-even deviation at 100.0 is ~1e-4
    ref = table([(100.0,)])
    assert compare_result_tables(table([(100.0 + 5e-5,)]), ref)[0] is True
    assert compare_result_tables(table([(100.0 + 1e-3,)]), ref)[0] is False


def test_ea_null_handling_follows_policy():
    cand, ref = table([(None,)]), table([(None,)])
    assert compare_result_tables(cand, ref)[0] is True
    strict_nulls = ComparisonPolicy(null_equals_null=False)
    assert compare_result_tables(cand, ref, strict_nulls)[0] is False


def test_ea_bool_is_not_the_integer_one():
    assert compare_result_tables(table([(True,)]), table([(1,)]))[0] is False


def test_ea_failed_execution_records_the_reason():
    out = execution_accuracy(None, table([(1,)]), error="gen-execution-failed")
    assert out.value is False
    assert out.detail["reason"] == "gen-execution-failed"


# -- exact match ----------------------------------------------------------


GT = parse_sql("SELECT name FROM student WHERE year = 3")


def test_em_spider_masks_literal_values():
    out = exact_match_metric("SELECT name FROM student WHERE year = 4", GT)
    assert out.value is True
    assert out.detail["mode"] == "spider_compatible"


def test_em_strict_keeps_literal_values():
    out = exact_match_metric("SELECT name FROM student WHERE year = 4", GT,
                             mode="strict")
    assert out.value is False
    assert out.detail["mismatches"]


def test_em_alias_and_case_noise_is_invisible():
    out = exact_match_metric(
        "select S.NAME from student as s where s.year = 3", GT, mode="strict")
    assert out.value is True


def test_em_unparsable_candidate_fails_with_reason():
    out = exact_match_metric("SELECT FROM WHERE", GT)
    assert out.value is False
    assert out.detail["reason"] == "unparsable"


# -- classification consistency -------------------------------------------


def test_cc_allows_simpler_generations():
    gt = parse_sql("SELECT s.name FROM student s JOIN department d "
                   "ON s.dept_id = d.id")
    out = classification_consistency("SELECT name FROM student", gt)
    assert out.value is True
    assert out.detail == {"gen": "1.2", "gt": "3.1"}


def test_cc_rejects_escalation():
    gt = parse_sql("SELECT name FROM student")
    out = classification_consistency(
        "SELECT s.name FROM student s JOIN department d ON s.dept_id = d.id",
        gt)
    assert out.value is False


def test_cc_unparsable_candidate_is_inconsistent():
    out = classification_consistency("not sql at all", GT)
    assert out.value is False
    assert out.detail["reason"] == "unparsable"


# -- efficiency within tolerance --------------------------------------------


def timing(median, *, timeout=False):
    samples = () if median is None else (median,)
    return TimingStats(samples_ms=samples, median_ms=median, timeout=timeout)


def test_etc_accepts_exactly_at_budget():
    # tau=1.0 doubles the reference median
    out = efficiency_within_tolerance(timing(20.0), timing(10.0), tau=1.0)
    assert out.value is True
    assert out.detail["budget_ms"] == 20.0


def test_etc_rejects_just_over_budget():
    out = efficiency_within_tolerance(timing(20.001), timing(10.0), tau=1.0)
    assert out.value is False


def test_etc_floor_protects_fast_references():
    # a 0.01ms reference would otherwise set an impossible budget
    out = efficiency_within_tolerance(timing(1.5), timing(0.01), tau=1.0,
                                      floor_ms=1.0)
    assert out.value is True


def test_etc_candidate_timeout_fails():
    out = efficiency_within_tolerance(timing(None, timeout=True), timing(10.0))
    assert out.value is False
    assert out.detail["reason"] == "timeout"


def test_etc_reference_timeout_is_not_evaluable():
    out = efficiency_within_tolerance(timing(5.0), timing(None, timeout=True))
    assert out.value is None
    assert out.detail["reason"] == "gt-timing-unavailable"


@given(st.floats(0.5, 500, allow_nan=False),
       st.floats(0.5, 500, allow_nan=False),
       st.floats(0, 3))
def test_etc_matches_the_budget_formula(gen_ms, gt_ms, tau):
    out = efficiency_within_tolerance(timing(gen_ms), timing(gt_ms), tau=tau)
    assert out.value == (gen_ms <= (1 + tau) * max(gt_ms, 1.0))


# -- token usage ------------------------------------------------------------


def test_tu_prefers_provider_counts():
    out = token_usage(input_tokens=120, output_tokens=30,
                      prompt_text="x", response_text="y")
    assert out.value == 150
    assert "approximate" not in out.detail


def test_tu_estimates_when_counts_are_missing():
    out = token_usage(input_tokens=None, output_tokens=None,
                      prompt_text="a" * 10, response_text="b" * 7)
    assert out.value == math.ceil(10 / 4) + math.ceil(7 / 4)
    assert out.detail["approximate"] is True


def test_tu_empty_response_costs_no_output_tokens():
    out = token_usage(input_tokens=None, output_tokens=None,
                      prompt_text="abcd", response_text="")
    assert out.detail["output_tokens"] == 0
