"""Repair search: shortest sound transform sequences, nothing more."""

from sqlgauge.datastore.executor import ResultTable
from sqlgauge.repair import CATALOG, Transform, _apply, suggest_repairs


def table(rows, *, ordered=False, columns=None):
    width = len(rows[0]) if rows else 0
    cols = tuple(columns) if columns else tuple(f"c{i}" for i in range(width))
    return ResultTable(columns=cols, rows=tuple(tuple(r) for r in rows),
                       ordered=ordered, truncated=False)


def keys(suggestions):
    return [s.transforms for s in suggestions]


def test_matching_tables_need_no_repair():
    t = table([(1, "a"), (2, "b")])
    assert suggest_repairs(t, t) == []


def test_swapped_columns_suggest_exactly_column_reorder():
    # swapping the SELECT list swaps the output column names with it
    ref = table([(1, "a"), (2, "b")], columns=["id", "name"])
    cand = table([("a", 1), ("b", 2)], columns=["name", "id"])
    assert keys(suggest_repairs(cand, ref)) == [("column_reorder",)]


def test_column_reorder_matches_by_values_when_names_differ():
    ref = table([(1, "a"), (2, "b")], columns=["id", "name"])
    cand = table([("a", 1), ("b", 2)], columns=["x", "y"])
    assert keys(suggest_repairs(cand, ref)) == [("column_reorder",)]


def test_column_reorder_application_is_sound():
    ref = table([(1, "a"), (2, "b")], columns=["id", "name"])
    cand = table([("a", 1), ("b", 2)], columns=["name", "id"])
    applied = _apply(Transform("column_reorder"), cand, ref)
    assert applied is not None
    fixed, ref_after = applied
    assert fixed.rows == ref_after.rows == ref.rows


def test_extra_columns_suggest_projection():
    ref = table([(1,), (2,)])
    cand = table([(1, "x"), (2, "y")])
    assert keys(suggest_repairs(cand, ref)) == [("column_project",)]


def test_duplicate_rows_suggest_dedup():
    ref = table([(1,), (2,)])
    cand = table([(1,), (1,), (2,)])
    suggestions = keys(suggest_repairs(cand, ref))
    assert ("row_dedup",) in suggestions
    assert all(len(s) == 1 for s in suggestions)


def test_wrong_row_order_suggests_ignore_order():
    ref = table([(1,), (2,), (3,)], ordered=True)
    cand = table([(3,), (1,), (2,)])
    assert keys(suggest_repairs(cand, ref)) == [("ignore_order",)]


def test_near_boundary_floats_round_to_a_match():
    # 2.4999 vs 2.5001: only the 2-decimal rounding agrees (0 decimals
    # splits across the .5 boundary, 4 decimals keeps them apart)
    ref = table([(2.5001,)])
    cand = table([(2.4999,)])
    assert keys(suggest_repairs(cand, ref)) == [("round_values(2)",)]


def test_every_sufficient_rounding_is_reported():
    ref = table([(3.14,)])
    cand = table([(3.14159,)])
    assert keys(suggest_repairs(cand, ref)) == [("round_values(0)",),
                                                ("round_values(2)",)]


def test_missing_limit_suggests_truncation():
    ref = table([(1,), (2,)], ordered=True)
    cand = table([(1,), (2,), (3,)])
    assert keys(suggest_repairs(cand, ref)) == [("limit_truncate",)]


def test_all_minimal_fixes_are_reported_in_catalog_order():
    # one duplicated row and nothing else: dedup fixes it, and so does
    # truncating to the reference length since the dupe is last
    ref = table([(1,), (2,)])
    cand = table([(1,), (2,), (2,)])
    assert keys(suggest_repairs(cand, ref)) == [("row_dedup",),
                                                ("limit_truncate",)]


def test_two_step_repairs_only_when_no_single_step_works():
    ref = table([(1, "a"), (2, "b")], columns=["id", "name"])
    cand = table([("a", 1), ("b", 2), ("b", 2)],
                 columns=["name", "id"])  # swapped AND duplicated
    suggestions = keys(suggest_repairs(cand, ref))
    assert suggestions
    assert all(len(s) == 2 for s in suggestions)
    assert ("column_reorder", "row_dedup") in suggestions


def test_depth_cap_returns_empty_when_exceeded():
    ref = table([(1, "a"), (2, "b")], columns=["id", "name"])
    cand = table([("a", 1), ("b", 2), ("b", 2)], columns=["name", "id"])
    assert suggest_repairs(cand, ref, max_depth=1) == []


def test_unfixable_tables_yield_nothing():
    assert suggest_repairs(table([(999,)]), table([(1,)])) == []


def test_projection_never_invents_columns():
    # candidate is NARROWER than the reference: projection is inapplicable
    assert _apply(Transform("column_project"), table([(1,)]),
                  table([(1, "a")])) is None


def test_catalog_keys_are_stable():
    assert [t.key for t in CATALOG] == [
        "column_reorder", "column_project", "row_dedup", "ignore_order",
        "round_values(0)", "round_values(2)", "round_values(4)",
        "limit_truncate"]
