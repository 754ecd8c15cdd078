"""Structural exact match over normalized clause components.

Two queries match when every clause component of their normal forms is
equal: select items (with the DISTINCT marker), FROM sources (join kind
included for outer joins), join conditions, WHERE conjuncts, GROUP BY
keys, HAVING conjuncts, ORDER BY items in order, LIMIT/OFFSET, compound
operators, and — recursively — every CTE and compound arm. Subqueries
inside expressions take part through the canonical rendering of the
containing component.

spider_compatible mode swaps every literal for a ``?`` placeholder before
comparing (LIMIT included), so queries that differ only in constant
values match; strict mode keeps values. The diff lists each component
that differs, with a path into CTEs/arms, and serializes to JSON.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .nodes import (
    Join, Literal, NaryBool, Placeholder, Query, QueryAst, SelectCore,
    SetOp, SubqueryTable, TableRef,
)
from .normalize import Schema, normalize
from .render import render_expr, render_query

MODES = ("spider_compatible", "strict")


@dataclass(frozen=True)
class Mismatch:
    path: str
    component: str
    left: object
    right: object


@dataclass
class ComponentDiff:
    mismatches: list = field(default_factory=list)

    @property
    def equal(self) -> bool:
        return not self.mismatches

    def add(self, path: str, component: str, left, right):
        self.mismatches.append(Mismatch(path, component, left, right))

    def to_json(self) -> dict:
        return {
            "equal": self.equal,
            "mismatches": [
                {"path": m.path, "component": m.component,
                 "left": m.left, "right": m.right}
                for m in self.mismatches
            ],
        }


def exact_match(gen: QueryAst, gt: QueryAst, mode: str = "spider_compatible",
                schema: Optional[Schema] = None) -> tuple:
    """Compare two parsed queries structurally. Returns (matched, diff)."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    left = normalize(gen, schema=schema, on_ambiguous="keep").root
    right = normalize(gt, schema=schema, on_ambiguous="keep").root
    if mode == "spider_compatible":
        left = _placeholderized(left, gen.dialect)
        right = _placeholderized(right, gt.dialect)
    diff = ComponentDiff()
    _compare_query(query_components(left), query_components(right), "query", diff)
    return diff.equal, diff


def _placeholderized(root: Query, dialect: str) -> Query:
    swapped = _swap_literals(root)
    # a second normalization re-sorts and dedups around the placeholders
    return normalize(QueryAst(root=swapped, dialect=dialect, source_text=""),
                     on_ambiguous="keep").root


def _swap_literals(node):
    if isinstance(node, Literal):
        return Placeholder()
    if isinstance(node, Query):
        return Query(
            body=_swap_literals(node.body),
            ctes=tuple(type(c)(name=c.name, query=_swap_literals(c.query),
                               columns=c.columns) for c in node.ctes),
            recursive=node.recursive,
            order_by=tuple(type(o)(expr=_swap_literals(o.expr), desc=o.desc)
                           for o in node.order_by),
            limit=_swap_literals(node.limit) if node.limit is not None else None,
            offset=_swap_literals(node.offset) if node.offset is not None else None,
        )
    if isinstance(node, SetOp):
        return SetOp(op=node.op, left=_swap_literals(node.left),
                     right=_swap_literals(node.right))
    if isinstance(node, SelectCore):
        return SelectCore(
            items=tuple(type(i)(expr=_swap_literals(i.expr), alias=i.alias)
                        for i in node.items),
            distinct=node.distinct,
            from_=_swap_literals(node.from_) if node.from_ is not None else None,
            where=_swap_literals(node.where) if node.where is not None else None,
            group_by=tuple(_swap_literals(k) for k in node.group_by),
            having=_swap_literals(node.having) if node.having is not None else None,
        )
    if isinstance(node, Join):
        return Join(kind=node.kind, left=_swap_literals(node.left),
                    right=_swap_literals(node.right),
                    on=_swap_literals(node.on) if node.on is not None else None,
                    using=node.using)
    if isinstance(node, SubqueryTable):
        return SubqueryTable(query=_swap_literals(node.query), alias=node.alias)
    if isinstance(node, TableRef):
        return node
    # generic expression: rebuild via dataclass fields
    from dataclasses import fields as dc_fields, replace
    changes = {}
    for f in dc_fields(node):
        value = getattr(node, f.name)
        if isinstance(value, (Literal, Query)) or hasattr(value, "__dataclass_fields__"):
            changes[f.name] = _swap_literals(value)
        elif isinstance(value, tuple) and value and hasattr(value[0], "__dataclass_fields__"):
            changes[f.name] = tuple(_swap_literals(v) for v in value)
        elif isinstance(value, tuple) and value and isinstance(value[0], tuple):
            changes[f.name] = tuple(
                tuple(_swap_literals(x) for x in pair) for pair in value
            )
    return replace(node, **changes) if changes else node


# -- componentization ----------------------------------------------------


def query_components(q: Query) -> dict:
    """Clause components of a normalized query, JSON-shaped."""
    out = {
        "ctes": [query_components(c.query) for c in q.ctes],
        "recursive": q.recursive,
        "order-by": [render_expr(o.expr) + (" desc" if o.desc else " asc")
                     for o in q.order_by],
        "limit": [render_expr(q.limit) if q.limit is not None else None,
                  render_expr(q.offset) if q.offset is not None else None],
    }
    body = q.body
    if isinstance(body, SetOp):
        ops, arms = _flatten_setop(body)
        out["set-operators"] = ops
        out["arms"] = arms
    else:
        out["set-operators"] = []
        out["core"] = _core_components(body) if isinstance(body, SelectCore) \
            else query_components(body)
    return out


def _flatten_setop(body: SetOp):
    ops = []
    arms = []

    def walk(node):
        if isinstance(node, SetOp):
            walk(node.left)
            ops.append(node.op)
            walk(node.right)
        elif isinstance(node, SelectCore):
            arms.append(_core_components(node))
        else:
            arms.append(query_components(node))

    walk(body)
    return ops, arms


def _core_components(core: SelectCore) -> dict:
    from_tables = []
    join_conditions = []

    def walk(item):
        if item is None:
            return
        if isinstance(item, Join):
            walk(item.left)
            tag = item.kind if item.kind in ("left", "right", "full") else None
            walk_leaf(item.right, tag)
            if item.on is not None:
                join_conditions.extend(sorted(
                    render_expr(c) for c in _conjunct_list(item.on)))
        else:
            walk_leaf(item, None)

    def walk_leaf(item, tag):
        if isinstance(item, Join):   # right side nested (not parser-shaped)
            walk(item)
            return
        if isinstance(item, TableRef):
            entry = item.name
        else:
            entry = "(" + render_query(item.query) + ")"
        from_tables.append(f"{entry}({tag})" if tag else entry)

    walk(core.from_)

    return {
        "select-items": {
            "distinct": core.distinct,
            "items": sorted(render_expr(i.expr) for i in core.items),
        },
        "from-tables": sorted(from_tables),
        "join-conditions": sorted(set(join_conditions)),
        "where-conjuncts": _conjunct_renders(core.where),
        "group-by": [render_expr(k) for k in core.group_by],
        "having-conjuncts": _conjunct_renders(core.having),
    }


def _conjunct_list(e):
    if isinstance(e, NaryBool) and e.op == "and":
        return list(e.items)
    return [e]


def _conjunct_renders(e):
    if e is None:
        return []
    return sorted(render_expr(c) for c in _conjunct_list(e))


# -- comparison -----------------------------------------------------------

_CORE_COMPONENTS = ("select-items", "from-tables", "join-conditions",
                    "where-conjuncts", "group-by", "having-conjuncts")


def _compare_query(lc: dict, rc: dict, path: str, diff: ComponentDiff) -> None:
    for name in ("recursive", "order-by", "limit", "set-operators"):
        if lc[name] != rc[name]:
            diff.add(path, name, lc[name], rc[name])

    if len(lc["ctes"]) != len(rc["ctes"]):
        diff.add(path, "ctes", len(lc["ctes"]), len(rc["ctes"]))
    else:
        for i, (l, r) in enumerate(zip(lc["ctes"], rc["ctes"])):
            _compare_query(l, r, f"{path}.cte[{i}]", diff)

    l_arms, r_arms = lc.get("arms"), rc.get("arms")
    if (l_arms is None) != (r_arms is None):
        return  # set-operators mismatch already recorded above
    if l_arms is not None:
        if len(l_arms) == len(r_arms):
            for i, (l, r) in enumerate(zip(l_arms, r_arms)):
                _compare_node(l, r, f"{path}.arm[{i}]", diff)
        return
    _compare_node(lc["core"], rc["core"], path, diff)


def _compare_node(l: dict, r: dict, path: str, diff: ComponentDiff) -> None:
    """Compare an arm/core slot: either core components or a nested query."""
    l_is_query = "ctes" in l
    r_is_query = "ctes" in r
    if l_is_query != r_is_query:
        diff.add(path, "structure",
                 "query" if l_is_query else "select",
                 "query" if r_is_query else "select")
        return
    if l_is_query:
        _compare_query(l, r, path, diff)
        return
    for name in _CORE_COMPONENTS:
        if l.get(name) != r.get(name):
            diff.add(path, name, l.get(name), r.get(name))
