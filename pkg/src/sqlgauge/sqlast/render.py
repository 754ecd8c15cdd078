"""Render AST nodes back to SQL text.

Keywords come out uppercase, identifiers are quoted only when they would
otherwise collide with a keyword or need escaping, and parentheses are
inserted from operator precedence. For any tree produced by parse_sql,
parse_sql(render(tree)) yields an equal tree.
"""

from __future__ import annotations

import re

from .nodes import (
    Between, Bound, Binary, Case, Cast, ColumnRef, Cte, Exists, Frame,
    FuncCall, InList, InSubquery, IsNull, Join, Like, Literal, NaryBool,
    OrderItem, Placeholder, Quantified, Query, QueryAst, ScalarSubquery,
    SelectCore, SelectItem, SetOp, Star, SubqueryTable, TableRef, Unary,
    WindowSpec,
)

_BARE_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*\Z")

_QUOTE_WORDS = frozenset(
    """select from where group having order limit offset union intersect
    except join inner left right full cross natural outer on using and or
    not as when then else end case cast in is like between exists null
    true false distinct all any some with recursive by asc desc over
    partition rows range unbounded preceding following current row escape
    values set window""".split()
)

# precedence levels, matching the parser's climb
_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_CMP = 4
_PREC_CONCAT = 5
_PREC_ADD = 6
_PREC_MUL = 7
_PREC_UNARY = 8
_PREC_ATOM = 9

_BIN_PREC = {
    "or": _PREC_OR, "and": _PREC_AND,
    "=": _PREC_CMP, "!=": _PREC_CMP, "<": _PREC_CMP, ">": _PREC_CMP,
    "<=": _PREC_CMP, ">=": _PREC_CMP,
    "||": _PREC_CONCAT, "+": _PREC_ADD, "-": _PREC_ADD,
    "*": _PREC_MUL, "/": _PREC_MUL, "%": _PREC_MUL,
}


def render(node) -> str:
    """Render a QueryAst, Query, or expression node to SQL text."""
    if isinstance(node, QueryAst):
        return render_query(node.root)
    if isinstance(node, Query):
        return render_query(node)
    if isinstance(node, (SelectCore, SetOp)):
        return _render_body(node)
    return render_expr(node)


def ident(name: str) -> str:
    if _BARE_NAME.match(name) and name.lower() not in _QUOTE_WORDS:
        return name
    return '"' + name.replace('"', '""') + '"'


def render_query(q: Query) -> str:
    parts = []
    if q.ctes:
        lead = "WITH RECURSIVE " if q.recursive else "WITH "
        parts.append(lead + ", ".join(_render_cte(c) for c in q.ctes))
    parts.append(_render_body(q.body))
    if q.order_by:
        parts.append("ORDER BY " + ", ".join(_render_order(o) for o in q.order_by))
    if q.limit is not None:
        parts.append("LIMIT " + render_expr(q.limit))
        if q.offset is not None:
            parts.append("OFFSET " + render_expr(q.offset))
    return " ".join(parts)


def _render_cte(c: Cte) -> str:
    cols = ""
    if c.columns:
        cols = "(" + ", ".join(ident(x) for x in c.columns) + ")"
    return f"{ident(c.name)}{cols} AS ({render_query(c.query)})"


def _render_body(body) -> str:
    if isinstance(body, Query):
        return "(" + render_query(body) + ")"
    if isinstance(body, SetOp):
        op = {"union": "UNION", "union_all": "UNION ALL",
              "intersect": "INTERSECT", "except": "EXCEPT"}[body.op]
        left = _render_body(body.left)
        # right-nested compounds need explicit grouping to survive reparsing
        if isinstance(body.right, SetOp):
            right = "(" + _render_body(body.right) + ")"
        else:
            right = _render_body(body.right)
        return f"{left} {op} {right}"
    return _render_core(body)


def _render_core(core: SelectCore) -> str:
    parts = ["SELECT"]
    if core.distinct:
        parts.append("DISTINCT")
    parts.append(", ".join(_render_item(it) for it in core.items))
    if core.from_ is not None:
        parts.append("FROM " + _render_from(core.from_))
    if core.where is not None:
        parts.append("WHERE " + render_expr(core.where))
    if core.group_by:
        parts.append("GROUP BY " + ", ".join(render_expr(e) for e in core.group_by))
    if core.having is not None:
        parts.append("HAVING " + render_expr(core.having))
    return " ".join(parts)


def _render_item(it: SelectItem) -> str:
    text = render_expr(it.expr)
    if it.alias:
        text += " AS " + ident(it.alias)
    return text


def _render_from(item) -> str:
    if isinstance(item, TableRef):
        text = ident(item.name)
        if item.alias:
            text += " AS " + ident(item.alias)
        return text
    if isinstance(item, SubqueryTable):
        text = "(" + render_query(item.query) + ")"
        if item.alias:
            text += " AS " + ident(item.alias)
        return text
    if isinstance(item, Join):
        left = _render_from(item.left)
        right = _render_from(item.right)
        if item.kind == "comma":
            return f"{left}, {right}"
        word = {"inner": "JOIN", "left": "LEFT JOIN", "right": "RIGHT JOIN",
                "full": "FULL JOIN", "cross": "CROSS JOIN"}[item.kind]
        text = f"{left} {word} {right}"
        if item.on is not None:
            text += " ON " + render_expr(item.on)
        elif item.using:
            text += " USING (" + ", ".join(ident(c) for c in item.using) + ")"
        return text
    raise TypeError(f"not a FROM item: {item!r}")


def _render_order(o: OrderItem) -> str:
    return render_expr(o.expr) + (" DESC" if o.desc else "")


def render_expr(e, min_prec: int = 0) -> str:
    text, prec = _expr(e)
    if prec < min_prec:
        return "(" + text + ")"
    return text


def _expr(e):  # -> (text, precedence)
    if isinstance(e, Literal):
        return _literal(e), _PREC_ATOM
    if isinstance(e, Placeholder):
        return "?", _PREC_ATOM
    if isinstance(e, ColumnRef):
        if e.table:
            return f"{ident(e.table)}.{ident(e.name)}", _PREC_ATOM
        return ident(e.name), _PREC_ATOM
    if isinstance(e, Star):
        return (f"{ident(e.table)}.*" if e.table else "*"), _PREC_ATOM
    if isinstance(e, Binary):
        prec = _BIN_PREC[e.op]
        op = e.op.upper() if e.op in ("and", "or") else e.op
        left = render_expr(e.left, prec)
        right = render_expr(e.right, prec + 1)
        return f"{left} {op} {right}", prec
    if isinstance(e, NaryBool):
        prec = _BIN_PREC[e.op]
        joined = f" {e.op.upper()} ".join(render_expr(x, prec + 1) for x in e.items)
        return joined, prec
    if isinstance(e, Unary):
        if e.op == "not":
            return "NOT " + render_expr(e.operand, _PREC_NOT), _PREC_NOT
        return e.op + render_expr(e.operand, _PREC_UNARY), _PREC_UNARY
    if isinstance(e, IsNull):
        word = "IS NOT NULL" if e.negated else "IS NULL"
        return f"{render_expr(e.operand, _PREC_CONCAT)} {word}", _PREC_CMP
    if isinstance(e, InList):
        word = "NOT IN" if e.negated else "IN"
        items = ", ".join(render_expr(x) for x in e.items)
        return f"{render_expr(e.expr, _PREC_CONCAT)} {word} ({items})", _PREC_CMP
    if isinstance(e, InSubquery):
        word = "NOT IN" if e.negated else "IN"
        return (
            f"{render_expr(e.expr, _PREC_CONCAT)} {word} ({render_query(e.query)})",
            _PREC_CMP,
        )
    if isinstance(e, Like):
        word = "NOT LIKE" if e.negated else "LIKE"
        text = f"{render_expr(e.expr, _PREC_CONCAT)} {word} {render_expr(e.pattern, _PREC_CONCAT)}"
        if e.escape is not None:
            text += " ESCAPE " + render_expr(e.escape, _PREC_CONCAT)
        return text, _PREC_CMP
    if isinstance(e, Between):
        word = "NOT BETWEEN" if e.negated else "BETWEEN"
        return (
            f"{render_expr(e.expr, _PREC_CONCAT)} {word} "
            f"{render_expr(e.low, _PREC_CONCAT)} AND {render_expr(e.high, _PREC_CONCAT)}",
            _PREC_CMP,
        )
    if isinstance(e, Exists):
        lead = "NOT EXISTS" if e.negated else "EXISTS"
        return f"{lead} ({render_query(e.query)})", _PREC_ATOM
    if isinstance(e, ScalarSubquery):
        return "(" + render_query(e.query) + ")", _PREC_ATOM
    if isinstance(e, Quantified):
        word = e.quantifier.upper()
        return (
            f"{render_expr(e.expr, _PREC_CONCAT)} {e.op} {word} ({render_query(e.query)})",
            _PREC_CMP,
        )
    if isinstance(e, Case):
        parts = ["CASE"]
        if e.operand is not None:
            parts.append(render_expr(e.operand))
        for cond, result in e.whens:
            parts.append(f"WHEN {render_expr(cond)} THEN {render_expr(result)}")
        if e.else_ is not None:
            parts.append("ELSE " + render_expr(e.else_))
        parts.append("END")
        return " ".join(parts), _PREC_ATOM
    if isinstance(e, Cast):
        return f"CAST({render_expr(e.expr)} AS {e.type_name.upper()})", _PREC_ATOM
    if isinstance(e, FuncCall):
        if e.star:
            inner = "*"
        else:
            inner = ", ".join(render_expr(a) for a in e.args)
            if e.distinct:
                inner = "DISTINCT " + inner
        text = f"{e.name.upper()}({inner})"
        if e.window is not None:
            text += " OVER " + _render_window(e.window)
        return text, _PREC_ATOM
    raise TypeError(f"not an expression node: {e!r}")


def _render_window(w: WindowSpec) -> str:
    parts = []
    if w.partition_by:
        parts.append("PARTITION BY " + ", ".join(render_expr(x) for x in w.partition_by))
    if w.order_by:
        parts.append("ORDER BY " + ", ".join(_render_order(o) for o in w.order_by))
    if w.frame is not None:
        parts.append(_render_frame(w.frame))
    return "(" + " ".join(parts) + ")"


def _render_frame(f: Frame) -> str:
    unit = f.unit.upper()
    if f.end is None:
        return f"{unit} {_render_bound(f.start)}"
    return f"{unit} BETWEEN {_render_bound(f.start)} AND {_render_bound(f.end)}"


def _render_bound(b: Bound) -> str:
    if b.kind == "unbounded_preceding":
        return "UNBOUNDED PRECEDING"
    if b.kind == "unbounded_following":
        return "UNBOUNDED FOLLOWING"
    if b.kind == "current":
        return "CURRENT ROW"
    word = "PRECEDING" if b.kind == "preceding" else "FOLLOWING"
    return f"{render_expr(b.value)} {word}"


def _literal(lit: Literal) -> str:
    if lit.kind == "null":
        return "NULL"
    if lit.kind == "bool":
        return "TRUE" if lit.value else "FALSE"
    if lit.kind == "string":
        return "'" + str(lit.value).replace("'", "''") + "'"
    if lit.kind == "int":
        return str(lit.value)
    return repr(float(lit.value))
