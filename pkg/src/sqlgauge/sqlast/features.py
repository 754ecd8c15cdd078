"""Structural feature extraction: which SQL constructs a query uses.

Flags are set by a full traversal — subqueries and CTE bodies included —
so a construct counts no matter how deeply it is buried. Scoping rules
that matter for classification:

* ``comparison_predicate`` and ``logical_connectives`` look at WHERE
  clauses only; join conditions and HAVING have their own flags/triggers.
* ``arithmetic_expr`` looks at select lists only (arithmetic operators or
  scalar function calls), since it feeds the "computed expression with
  aggregation" trigger.
* ``scalar_subquery_in_where`` is the WHERE-scoped refinement of
  ``scalar_subquery``.
* ``join_table_count`` and ``group_by_key_count`` are the maximum over
  all SELECT cores in the query.
* ``non_equi_join`` covers three shapes: an explicit CROSS JOIN, a join
  condition comparing columns with anything other than ``=``, and a join
  (explicit or comma) whose ON/WHERE conjuncts contain no column-to-column
  equality at all.
* A window function is "aggregate" when its name is an aggregate function
  (SUM, COUNT, ...); every other OVER call counts as ranking/navigation.
* ``recursive_cte`` means the query says WITH RECURSIVE.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .nodes import (
    Between, Binary, Case, Cast, ColumnRef, Exists, FuncCall, InList,
    InSubquery, IsNull, Join, Like, Literal, NaryBool, Placeholder,
    Quantified, Query, QueryAst, ScalarSubquery, SelectCore, SelectItem,
    SetOp, Star, SubqueryTable, TableRef, Unary,
)

AGGREGATE_FUNCTIONS = frozenset(
    ["count", "sum", "avg", "min", "max", "total", "group_concat"]
)

_CMP_OPS = ("=", "!=", "<", ">", "<=", ">=")


@dataclass(frozen=True)
class FeatureSet:
    star_select: bool = False
    column_projection: bool = False
    comparison_predicate: bool = False
    logical_connectives: bool = False
    like_between_in_null: bool = False
    order_by: bool = False
    limit: bool = False

    aggregate: bool = False
    distinct: bool = False
    group_by: bool = False
    having: bool = False
    arithmetic_expr: bool = False

    inner_join: bool = False
    outer_join: bool = False
    self_join: bool = False
    non_equi_join: bool = False

    scalar_subquery: bool = False
    scalar_subquery_in_where: bool = False
    in_subquery: bool = False
    exists: bool = False
    any_all: bool = False
    derived_table: bool = False
    select_subquery: bool = False

    union: bool = False
    intersect: bool = False
    except_: bool = False
    case_expr: bool = False
    cte: bool = False
    multi_cte: bool = False

    window_rank: bool = False
    window_agg: bool = False
    partition_by: bool = False
    window_frame: bool = False
    recursive_cte: bool = False

    join_table_count: int = 0
    nesting_depth: int = 0
    cte_count: int = 0
    group_by_key_count: int = 0

    def enabled(self) -> list[str]:
        out = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is True:
                out.append(f.name)
        return out


def extract_features(q: QueryAst) -> FeatureSet:
    w = _Walker()
    w.query(q.root, depth=0)
    return FeatureSet(**w.flags)


class _Walker:
    def __init__(self):
        self.flags = {f.name: f.default for f in fields(FeatureSet)}

    def set(self, name, value=True):
        self.flags[name] = value

    def bump(self, name, value):
        if value > self.flags[name]:
            self.flags[name] = value

    # -- structure ------------------------------------------------------

    def query(self, q: Query, depth: int):
        self.bump("nesting_depth", depth)
        if q.ctes:
            self.flags["cte_count"] += len(q.ctes)
            self.set("cte")
            if self.flags["cte_count"] >= 2:
                self.set("multi_cte")
            if q.recursive:
                self.set("recursive_cte")
            for cte in q.ctes:
                self.query(cte.query, depth + 1)
        self.body(q.body, depth)
        if q.order_by:
            self.set("order_by")
            for o in q.order_by:
                self.expr(o.expr, depth, where=False, select=False)
        if q.limit is not None:
            self.set("limit")

    def body(self, body, depth: int):
        if isinstance(body, SetOp):
            self.set({"union": "union", "union_all": "union",
                      "intersect": "intersect", "except": "except_"}[body.op])
            self.body(body.left, depth)
            self.body(body.right, depth)
        elif isinstance(body, Query):
            self.query(body, depth)
        else:
            self.core(body, depth)

    def core(self, core: SelectCore, depth: int):
        for item in core.items:
            if isinstance(item.expr, Star):
                self.set("star_select")
            else:
                if _projects_column(item.expr):
                    self.set("column_projection")
                self.select_item_expr(item.expr, depth)
        if core.distinct:
            self.set("distinct")

        if core.from_ is not None:
            self.from_clause(core.from_, core, depth)

        if core.where is not None:
            self.expr(core.where, depth, where=True, select=False)
        if core.group_by:
            self.set("group_by")
            self.bump("group_by_key_count", len(core.group_by))
            for key in core.group_by:
                self.expr(key, depth, where=False, select=False)
        if core.having is not None:
            self.set("having")
            self.expr(core.having, depth, where=False, select=False)

    def from_clause(self, root, core: SelectCore, depth: int):
        sources = []
        joins = []

        def walk(item):
            if isinstance(item, Join):
                joins.append(item)
                walk(item.left)
                walk(item.right)
            else:
                sources.append(item)

        walk(root)
        self.bump("join_table_count", len(sources))

        for src in sources:
            if isinstance(src, SubqueryTable):
                self.set("derived_table")
                self.query(src.query, depth + 1)

        if not joins:
            return

        base_names = [s.name.lower() for s in sources if isinstance(s, TableRef)]
        if len(base_names) != len(set(base_names)):
            self.set("self_join")

        explicit_cross = False
        non_eq_condition = False
        equi_somewhere = False
        for join in joins:
            if join.kind in ("inner", "comma"):
                self.set("inner_join")
            elif join.kind == "cross":
                self.set("inner_join")
                explicit_cross = True
            else:
                self.set("outer_join")
            if join.using:
                equi_somewhere = True
            if join.on is not None:
                self.expr(join.on, depth, where=False, select=False)
                for conj in _conjuncts(join.on):
                    if _is_column_equality(conj):
                        equi_somewhere = True
                    elif _is_column_comparison(conj):
                        non_eq_condition = True
        if core.where is not None:
            for conj in _conjuncts(core.where):
                if _is_column_equality(conj):
                    equi_somewhere = True
        if explicit_cross or non_eq_condition or not equi_somewhere:
            self.set("non_equi_join")

    # -- expressions ------------------------------------------------------

    def select_item_expr(self, e, depth: int):
        if _has_arithmetic(e):
            self.set("arithmetic_expr")
        self.expr(e, depth, where=False, select=True)

    def expr(self, e, depth: int, where: bool, select: bool):
        if e is None or isinstance(e, (Literal, Placeholder, ColumnRef, Star)):
            return
        if isinstance(e, Binary):
            if e.op in ("and", "or"):
                if where:
                    self.set("logical_connectives")
            elif e.op in _CMP_OPS and where:
                self.set("comparison_predicate")
            self.expr(e.left, depth, where, select)
            self.expr(e.right, depth, where, select)
            return
        if isinstance(e, NaryBool):
            if where:
                self.set("logical_connectives")
            for x in e.items:
                self.expr(x, depth, where, select)
            return
        if isinstance(e, Unary):
            if e.op == "not" and where:
                self.set("logical_connectives")
            self.expr(e.operand, depth, where, select)
            return
        if isinstance(e, (Like, Between, InList, IsNull)):
            self.set("like_between_in_null")
            for child in _predicate_children(e):
                self.expr(child, depth, where, select)
            return
        if isinstance(e, InSubquery):
            self.set("in_subquery")
            if select:
                self.set("select_subquery")
            self.expr(e.expr, depth, where, select)
            self.query(e.query, depth + 1)
            return
        if isinstance(e, Exists):
            self.set("exists")
            if select:
                self.set("select_subquery")
            self.query(e.query, depth + 1)
            return
        if isinstance(e, ScalarSubquery):
            self.set("scalar_subquery")
            if where:
                self.set("scalar_subquery_in_where")
            if select:
                self.set("select_subquery")
            self.query(e.query, depth + 1)
            return
        if isinstance(e, Quantified):
            self.set("any_all")
            if select:
                self.set("select_subquery")
            self.expr(e.expr, depth, where, select)
            self.query(e.query, depth + 1)
            return
        if isinstance(e, Case):
            self.set("case_expr")
            if e.operand is not None:
                self.expr(e.operand, depth, where, select)
            for cond, result in e.whens:
                self.expr(cond, depth, where, select)
                self.expr(result, depth, where, select)
            if e.else_ is not None:
                self.expr(e.else_, depth, where, select)
            return
        if isinstance(e, Cast):
            self.expr(e.expr, depth, where, select)
            return
        if isinstance(e, FuncCall):
            name = e.name.lower()
            if e.window is not None:
                if name in AGGREGATE_FUNCTIONS:
                    self.set("window_agg")
                else:
                    self.set("window_rank")
                if e.window.partition_by:
                    self.set("partition_by")
                if e.window.frame is not None:
                    self.set("window_frame")
                for x in e.window.partition_by:
                    self.expr(x, depth, where, select)
                for o in e.window.order_by:
                    self.expr(o.expr, depth, where, select)
            elif name in AGGREGATE_FUNCTIONS:
                self.set("aggregate")
            if e.distinct:
                self.set("distinct")
            for a in e.args:
                self.expr(a, depth, where, select)
            return


def _predicate_children(e):
    if isinstance(e, Like):
        out = [e.expr, e.pattern]
        if e.escape is not None:
            out.append(e.escape)
        return out
    if isinstance(e, Between):
        return [e.expr, e.low, e.high]
    if isinstance(e, InList):
        return [e.expr, *e.items]
    return [e.operand]


def _conjuncts(e):
    if isinstance(e, Binary) and e.op == "and":
        yield from _conjuncts(e.left)
        yield from _conjuncts(e.right)
    elif isinstance(e, NaryBool) and e.op == "and":
        for x in e.items:
            yield from _conjuncts(x)
    else:
        yield e


def _contains_column(e) -> bool:
    if isinstance(e, ColumnRef):
        return True
    if isinstance(e, Binary):
        return _contains_column(e.left) or _contains_column(e.right)
    if isinstance(e, Unary):
        return _contains_column(e.operand)
    if isinstance(e, Cast):
        return _contains_column(e.expr)
    if isinstance(e, FuncCall):
        return any(_contains_column(a) for a in e.args)
    return False


def _is_column_equality(e) -> bool:
    return (isinstance(e, Binary) and e.op == "="
            and _contains_column(e.left) and _contains_column(e.right))


def _is_column_comparison(e) -> bool:
    if isinstance(e, Binary) and e.op in _CMP_OPS and e.op != "=":
        return _contains_column(e.left) and _contains_column(e.right)
    if isinstance(e, Between):
        return _contains_column(e.expr) and (
            _contains_column(e.low) or _contains_column(e.high))
    return False


def _projects_column(e) -> bool:
    """True when a select item actually touches a column (so that a bare
    SELECT over literals still counts as the default subcategory)."""
    if isinstance(e, Case):
        parts = [e.operand, e.else_] + [x for pair in e.whens for x in pair]
        return any(_projects_column(x) for x in parts if x is not None)
    if isinstance(e, (Like, Between, InList, IsNull)):
        return any(_projects_column(x) for x in _predicate_children(e))
    return _contains_column(e)


def _has_arithmetic(e) -> bool:
    if isinstance(e, Binary):
        if e.op in ("+", "-", "*", "/", "%"):
            return True
        return _has_arithmetic(e.left) or _has_arithmetic(e.right)
    if isinstance(e, Unary):
        return _has_arithmetic(e.operand)
    if isinstance(e, Cast):
        return _has_arithmetic(e.expr)
    if isinstance(e, Case):
        parts = [e.operand, e.else_] + [x for pair in e.whens for x in pair]
        return any(_has_arithmetic(x) for x in parts if x is not None)
    if isinstance(e, FuncCall):
        if e.window is None and e.name.lower() not in AGGREGATE_FUNCTIONS:
            return True
        return any(_has_arithmetic(a) for a in e.args)
    return False
