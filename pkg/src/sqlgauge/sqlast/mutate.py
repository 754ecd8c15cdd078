"""Controlled AST mutations.

Used by the fault-injecting mock model (known-wrong answers with a known
repair) and by robustness tests that need systematic rewrites of a query
without changing — or while minimally changing — its meaning.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

from .nodes import (
    Join, Literal, Query, QueryAst, SelectCore, SetOp, Star, SubqueryTable,
    TableRef, ColumnRef,
)
from .parser import parse_sql
from .render import render_query


def swap_select_columns(ast: QueryAst) -> Optional[QueryAst]:
    """Swap the first two select items of the top-level core.

    Returns None when the query has fewer than two non-star items (or a
    compound body), i.e. when the mutation would not change the result
    column order.
    """
    core = _top_core(ast.root)
    if core is None or len(core.items) < 2:
        return None
    if any(isinstance(i.expr, Star) for i in core.items[:2]):
        return None
    items = list(core.items)
    items[0], items[1] = items[1], items[0]
    new_core = replace(core, items=tuple(items))
    root = replace(ast.root, body=new_core)
    return _rebuild(root, ast.dialect)


def drop_order_by(ast: QueryAst) -> Optional[QueryAst]:
    """Remove the query-level ORDER BY. None when there is none."""
    if not ast.root.order_by:
        return None
    root = replace(ast.root, order_by=())
    return _rebuild(root, ast.dialect)


def rename_aliases(ast: QueryAst) -> QueryAst:
    """Systematically rename every table alias (and alias every bare
    table), rewriting qualified column references to follow — including
    correlated references from subqueries to outer aliases. The result is
    semantically identical to the input."""
    counter = {"n": 0}

    def fresh() -> str:
        counter["n"] += 1
        return f"rt{counter['n']}"

    def walk_query(q: Query, outer: dict) -> Query:
        body, mapping = walk_body(q.body, outer)
        order_by = tuple(
            replace(o, expr=_requalify(o.expr, mapping, walk_query))
            for o in q.order_by
        )
        return replace(
            q,
            ctes=tuple(replace(c, query=walk_query(c.query, outer))
                       for c in q.ctes),
            body=body,
            order_by=order_by,
        )

    def walk_body(body, outer):
        if isinstance(body, SetOp):
            left, _ = walk_body(body.left, outer)
            right, _ = walk_body(body.right, outer)
            return SetOp(op=body.op, left=left, right=right), dict(outer)
        if isinstance(body, Query):
            return walk_query(body, outer), dict(outer)
        return walk_core(body, outer)

    def walk_core(core: SelectCore, outer):
        mapping = dict(outer)

        def walk_from(item):
            if item is None:
                return None
            if isinstance(item, Join):
                return replace(item, left=walk_from(item.left),
                               right=walk_from(item.right))
            if isinstance(item, TableRef):
                alias = fresh()
                mapping[(item.alias or item.name).lower()] = alias
                mapping.setdefault(item.name.lower(), alias)
                return TableRef(name=item.name, alias=alias)
            alias = fresh()
            if item.alias:
                mapping[item.alias.lower()] = alias
            return SubqueryTable(query=walk_query(item.query, outer),
                                 alias=alias)

        from_ = walk_from(core.from_)
        # requalify ON conditions only after every source is registered
        from_ = _requalify_from(from_, mapping, walk_query)
        new_core = replace(
            core,
            from_=from_,
            items=tuple(replace(i, expr=_requalify(i.expr, mapping, walk_query))
                        for i in core.items),
            where=_requalify(core.where, mapping, walk_query),
            group_by=tuple(_requalify(k, mapping, walk_query)
                           for k in core.group_by),
            having=_requalify(core.having, mapping, walk_query),
        )
        return new_core, mapping

    return _rebuild(walk_query(ast.root, {}), ast.dialect)


def _requalify_from(item, mapping, walk_query):
    if item is None or isinstance(item, (TableRef, SubqueryTable)):
        return item
    return replace(item, left=_requalify_from(item.left, mapping, walk_query),
                   right=_requalify_from(item.right, mapping, walk_query),
                   on=_requalify(item.on, mapping, walk_query))


def _requalify(e, mapping, walk_query):
    if e is None:
        return None
    if isinstance(e, ColumnRef):
        if e.table and e.table.lower() in mapping:
            return ColumnRef(table=mapping[e.table.lower()], name=e.name)
        return e
    if isinstance(e, Star):
        if e.table and e.table.lower() in mapping:
            return Star(table=mapping[e.table.lower()])
        return e
    if isinstance(e, Query):
        # subquery in an expression: its core sees the outer aliases
        return walk_query(e, mapping)
    if hasattr(e, "__dataclass_fields__"):
        from dataclasses import fields as dc_fields
        changes = {}
        for f in dc_fields(e):
            v = getattr(e, f.name)
            if isinstance(v, Query) or hasattr(v, "__dataclass_fields__"):
                changes[f.name] = _requalify(v, mapping, walk_query)
            elif isinstance(v, tuple) and v and (
                    hasattr(v[0], "__dataclass_fields__") or isinstance(v[0], tuple)):
                changes[f.name] = tuple(
                    tuple(_requalify(x, mapping, walk_query) for x in item)
                    if isinstance(item, tuple)
                    else _requalify(item, mapping, walk_query)
                    for item in v
                )
        return replace(e, **changes) if changes else e
    return e


def perturb_first_literal(ast: QueryAst) -> Optional[QueryAst]:
    """Change the first literal value found (int += 7, float += 0.5,
    string gets a suffix). None when the query holds no literal."""
    hit = {"done": False}

    def swap(lit: Literal) -> Literal:
        hit["done"] = True
        if lit.kind == "int":
            return Literal(kind="int", value=lit.value + 7)
        if lit.kind == "float":
            return Literal(kind="float", value=lit.value + 0.5)
        if lit.kind == "string":
            return Literal(kind="string", value=str(lit.value) + "_x")
        return lit

    def walk(node):
        if hit["done"]:
            return node
        if isinstance(node, Literal):
            return swap(node)
        if not hasattr(node, "__dataclass_fields__"):
            return node
        from dataclasses import fields as dc_fields
        changes = {}
        for f in dc_fields(node):
            if hit["done"]:
                break
            v = getattr(node, f.name)
            if hasattr(v, "__dataclass_fields__"):
                new = walk(v)
                if new is not v:
                    changes[f.name] = new
            elif isinstance(v, tuple) and v:
                new_items = []
                changed = False
                for x in v:
                    if not hit["done"] and hasattr(x, "__dataclass_fields__"):
                        nx = walk(x)
                        changed = changed or nx is not x
                        new_items.append(nx)
                    elif not hit["done"] and isinstance(x, tuple):
                        nx = tuple(walk(y) for y in x)
                        changed = changed or nx != x
                        new_items.append(nx)
                    else:
                        new_items.append(x)
                if changed:
                    changes[f.name] = tuple(new_items)
        return replace(node, **changes) if changes else node

    root = walk(ast.root)
    if not hit["done"]:
        return None
    return _rebuild(root, ast.dialect)


def _top_core(q: Query) -> Optional[SelectCore]:
    return q.body if isinstance(q.body, SelectCore) else None


def _rebuild(root: Query, dialect: str) -> QueryAst:
    # round through the renderer so source_text matches the mutated tree
    return parse_sql(render_query(root), dialect)
