"""Complexity taxonomy: 6 categories × 6 subcategories, trigger-driven.

A query lands in the highest-numbered category whose trigger fires, and
within it the highest-indexed subcategory whose trigger fires — so a
joined query containing a subquery is "nesting", not "joins". The full
trigger table ships as ``bundled/taxonomy_reference.md`` (TAXONOMY_VERSION
below); classify() is a pure function of the FeatureSet.

Category triggers:
  c2 aggregation    — aggregate, DISTINCT, GROUP BY, or HAVING
  c3 joins          — any join (explicit, comma, self, outer, non-equi)
  c4 nesting        — any subquery (scalar, IN, EXISTS, ANY/ALL, derived
                      table, select-list)
  c5 set ops & advanced — UNION/INTERSECT/EXCEPT, CASE, or CTE
  c6 windows & recursion — any window function or recursive CTE
  c1 basic          — everything else
"""

from __future__ import annotations

from dataclasses import dataclass

from .features import FeatureSet, extract_features
from .nodes import QueryAst

TAXONOMY_VERSION = "1.0"

CATEGORY_NAMES = {
    1: "basic single-table",
    2: "aggregation",
    3: "joins",
    4: "nesting",
    5: "set ops & advanced",
    6: "windows & recursion",
}


@dataclass(frozen=True, order=True)
class TaxonomyLabel:
    category: int
    index: int

    def __post_init__(self):
        if not (1 <= self.category <= 6 and 1 <= self.index <= 6):
            raise ValueError(f"invalid taxonomy label {self.category}.{self.index}")

    @property
    def category_code(self) -> str:
        return f"c{self.category}"

    @property
    def code(self) -> str:
        return f"{self.category}.{self.index}"

    def __str__(self) -> str:
        return self.code


ALL_SUBCATEGORIES = tuple(
    TaxonomyLabel(c, i) for c in range(1, 7) for i in range(1, 7)
)

SUBCATEGORY_DESCRIPTIONS = {
    "1.1": "star or constant projection with no predicates",
    "1.2": "explicit column projection",
    "1.3": "a comparison predicate in WHERE",
    "1.4": "logical connectives (AND/OR/NOT) in WHERE",
    "1.5": "LIKE, BETWEEN, IN (value list), or IS NULL",
    "1.6": "ORDER BY or LIMIT",
    "2.1": "an aggregate function without GROUP BY",
    "2.2": "DISTINCT",
    "2.3": "GROUP BY with a single key",
    "2.4": "GROUP BY with several keys",
    "2.5": "a HAVING clause",
    "2.6": "arithmetic or a scalar function in the select list alongside aggregation",
    "3.1": "a two-table inner equi-join",
    "3.2": "an inner join across three or more tables",
    "3.3": "an outer join",
    "3.4": "a self join",
    "3.5": "a join combined with aggregation",
    "3.6": "a non-equi or cross join",
    "4.1": "a scalar subquery in WHERE",
    "4.2": "IN with a subquery",
    "4.3": "EXISTS",
    "4.4": "an ANY/ALL quantified comparison",
    "4.5": "a derived table in FROM",
    "4.6": "a subquery in the select list, or two levels of nesting",
    "5.1": "UNION or UNION ALL",
    "5.2": "INTERSECT",
    "5.3": "EXCEPT",
    "5.4": "a CASE expression",
    "5.5": "a single CTE",
    "5.6": "several CTEs, or a CTE combined with a set operation",
    "6.1": "a ranking window function",
    "6.2": "an aggregate window function",
    "6.3": "PARTITION BY inside a window",
    "6.4": "an explicit window frame",
    "6.5": "WITH RECURSIVE",
    "6.6": "a window function combined with nesting or set operations",
}


def classify(q: QueryAst) -> TaxonomyLabel:
    return classify_features(extract_features(q))


def classify_features(f: FeatureSet) -> TaxonomyLabel:
    if (f.window_rank or f.window_agg or f.partition_by or f.window_frame
            or f.recursive_cte):
        return TaxonomyLabel(6, _sub_c6(f))
    if f.union or f.intersect or f.except_ or f.case_expr or f.cte:
        return TaxonomyLabel(5, _sub_c5(f))
    if (f.scalar_subquery or f.in_subquery or f.exists or f.any_all
            or f.derived_table or f.select_subquery):
        return TaxonomyLabel(4, _sub_c4(f))
    if f.inner_join or f.outer_join or f.self_join or f.non_equi_join:
        return TaxonomyLabel(3, _sub_c3(f))
    if f.aggregate or f.distinct or f.group_by or f.having:
        return TaxonomyLabel(2, _sub_c2(f))
    return TaxonomyLabel(1, _sub_c1(f))


def _highest(triggered: list[bool]) -> int:
    """Index (1-based) of the last True; 1 when none fire."""
    best = 1
    for i, hit in enumerate(triggered, start=1):
        if hit:
            best = i
    return best


def _sub_c1(f: FeatureSet) -> int:
    return _highest([
        f.star_select,
        f.column_projection,
        f.comparison_predicate,
        f.logical_connectives,
        f.like_between_in_null,
        f.order_by or f.limit,
    ])


def _sub_c2(f: FeatureSet) -> int:
    return _highest([
        f.aggregate and not f.group_by,
        f.distinct,
        f.group_by and f.group_by_key_count == 1,
        f.group_by and f.group_by_key_count >= 2,
        f.having,
        f.arithmetic_expr and f.aggregate,
    ])


def _sub_c3(f: FeatureSet) -> int:
    return _highest([
        f.join_table_count == 2 and not f.outer_join,
        f.join_table_count >= 3 and not f.outer_join,
        f.outer_join,
        f.self_join,
        f.aggregate or f.group_by or f.having,
        f.non_equi_join,
    ])


def _sub_c4(f: FeatureSet) -> int:
    return _highest([
        f.scalar_subquery_in_where,
        f.in_subquery,
        f.exists,
        f.any_all,
        f.derived_table,
        f.select_subquery or f.nesting_depth >= 2,
    ])


def _sub_c5(f: FeatureSet) -> int:
    set_op = f.union or f.intersect or f.except_
    return _highest([
        f.union,
        f.intersect,
        f.except_,
        f.case_expr,
        f.cte_count == 1,
        f.cte_count >= 2 or (f.cte and set_op),
    ])


def _sub_c6(f: FeatureSet) -> int:
    windowed = f.window_rank or f.window_agg
    set_op = f.union or f.intersect or f.except_
    return _highest([
        f.window_rank,
        f.window_agg,
        f.partition_by,
        f.window_frame,
        f.recursive_cte,
        windowed and (f.nesting_depth >= 1 or set_op),
    ])
