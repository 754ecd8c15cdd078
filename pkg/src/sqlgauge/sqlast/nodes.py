"""AST node types for the supported SELECT grammar.

All nodes are frozen dataclasses with structural equality, so
parse(render(ast)) == ast expresses the round-trip invariant directly.
Collections are stored as tuples to keep nodes hashable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


# --- expressions -----------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    kind: str  # 'int' | 'float' | 'string' | 'null' | 'bool'
    value: object


@dataclass(frozen=True)
class Placeholder:
    """Stand-in for a literal under value-insensitive comparison."""


@dataclass(frozen=True)
class ColumnRef:
    table: Optional[str]
    name: str


@dataclass(frozen=True)
class Star:
    table: Optional[str] = None


@dataclass(frozen=True)
class Bound:
    kind: str  # 'unbounded_preceding'|'preceding'|'current'|'following'|'unbounded_following'
    value: Optional["Expr"] = None


@dataclass(frozen=True)
class Frame:
    unit: str  # 'rows' | 'range'
    start: Bound
    end: Optional[Bound]


@dataclass(frozen=True)
class OrderItem:
    expr: "Expr"
    desc: bool = False


@dataclass(frozen=True)
class WindowSpec:
    partition_by: tuple["Expr", ...] = ()
    order_by: tuple[OrderItem, ...] = ()
    frame: Optional[Frame] = None


@dataclass(frozen=True)
class FuncCall:
    name: str
    args: tuple["Expr", ...] = ()
    distinct: bool = False
    star: bool = False  # e.g. count(*)
    window: Optional[WindowSpec] = None


@dataclass(frozen=True)
class Unary:
    op: str  # 'not' | '-' | '+'
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # 'or','and','=','!=','<','>','<=','>=','||','+','-','*','/','%'
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class NaryBool:
    """Flattened AND/OR with canonically ordered operands (normalized form only)."""

    op: str  # 'and' | 'or'
    items: tuple["Expr", ...]


@dataclass(frozen=True)
class IsNull:
    operand: "Expr"
    negated: bool = False


@dataclass(frozen=True)
class InList:
    expr: "Expr"
    items: tuple["Expr", ...]
    negated: bool = False


@dataclass(frozen=True)
class InSubquery:
    expr: "Expr"
    query: "Query"
    negated: bool = False


@dataclass(frozen=True)
class Like:
    expr: "Expr"
    pattern: "Expr"
    negated: bool = False
    escape: Optional["Expr"] = None


@dataclass(frozen=True)
class Between:
    expr: "Expr"
    low: "Expr"
    high: "Expr"
    negated: bool = False


@dataclass(frozen=True)
class Exists:
    query: "Query"
    negated: bool = False


@dataclass(frozen=True)
class ScalarSubquery:
    query: "Query"


@dataclass(frozen=True)
class Quantified:
    """Comparison against ANY/ALL of a subquery, e.g. x > ALL (SELECT ...)."""

    op: str
    quantifier: str  # 'any' | 'all'
    expr: "Expr"
    query: "Query"


@dataclass(frozen=True)
class Case:
    operand: Optional["Expr"]
    whens: tuple[tuple["Expr", "Expr"], ...]
    else_: Optional["Expr"] = None


@dataclass(frozen=True)
class Cast:
    expr: "Expr"
    type_name: str


Expr = Union[
    Literal, Placeholder, ColumnRef, Star, FuncCall, Unary, Binary, NaryBool,
    IsNull, InList, InSubquery, Like, Between, Exists, ScalarSubquery,
    Quantified, Case, Cast,
]


# --- query structure -------------------------------------------------------


@dataclass(frozen=True)
class SelectItem:
    expr: Expr
    alias: Optional[str] = None


@dataclass(frozen=True)
class TableRef:
    name: str
    alias: Optional[str] = None


@dataclass(frozen=True)
class SubqueryTable:
    query: "Query"
    alias: Optional[str] = None


@dataclass(frozen=True)
class Join:
    kind: str  # 'inner','left','right','full','cross','comma'
    left: "FromItem"
    right: "FromItem"
    on: Optional[Expr] = None
    using: tuple[str, ...] = ()


FromItem = Union[TableRef, SubqueryTable, Join]


@dataclass(frozen=True)
class SelectCore:
    items: tuple[SelectItem, ...]
    distinct: bool = False
    from_: Optional[FromItem] = None
    where: Optional[Expr] = None
    group_by: tuple[Expr, ...] = ()
    having: Optional[Expr] = None


@dataclass(frozen=True)
class SetOp:
    op: str  # 'union','union_all','intersect','except'
    left: "Body"
    right: "Body"


Body = Union[SelectCore, SetOp, "Query"]


@dataclass(frozen=True)
class Cte:
    name: str
    query: "Query"
    columns: tuple[str, ...] = ()


@dataclass(frozen=True)
class Query:
    body: Body
    ctes: tuple[Cte, ...] = ()
    recursive: bool = False
    order_by: tuple[OrderItem, ...] = ()
    limit: Optional[Expr] = None
    offset: Optional[Expr] = None


@dataclass(frozen=True)
class QueryAst:
    """A parsed single SELECT-form statement."""

    root: Query
    dialect: str = "sqlite"
    source_text: str = field(default="", compare=False)


@dataclass(frozen=True)
class NormalizedAst:
    """Same shape as QueryAst after normalization (see normalize module)."""

    root: Query
    dialect: str = "sqlite"
    alias_map: tuple[tuple[str, str], ...] = field(default=(), compare=False)


def iter_child_queries(q: Query):
    """Yield (child_query, context) for every directly nested Query.

    Context is one of 'cte', 'from', 'expr', 'arm'. Set-operation arms that are
    parenthesized full queries live at the same nesting depth as their parent,
    which the 'arm' context signals to depth-aware walkers.
    """
    for cte in q.ctes:
        yield cte.query, "cte"

    def from_exprs(item: FromItem):
        if isinstance(item, SubqueryTable):
            yield item.query, "from"
        elif isinstance(item, Join):
            yield from from_exprs(item.left)
            yield from from_exprs(item.right)
            if item.on is not None:
                yield from expr_queries(item.on)

    def expr_queries(e: Expr):
        if isinstance(e, (ScalarSubquery,)):
            yield e.query, "expr"
        elif isinstance(e, (InSubquery, Exists, Quantified)):
            yield e.query, "expr"
            if isinstance(e, InSubquery):
                yield from expr_queries(e.expr)
            if isinstance(e, Quantified):
                yield from expr_queries(e.expr)
        elif isinstance(e, Unary):
            yield from expr_queries(e.operand)
        elif isinstance(e, Binary):
            yield from expr_queries(e.left)
            yield from expr_queries(e.right)
        elif isinstance(e, NaryBool):
            for item in e.items:
                yield from expr_queries(item)
        elif isinstance(e, IsNull):
            yield from expr_queries(e.operand)
        elif isinstance(e, InList):
            yield from expr_queries(e.expr)
            for item in e.items:
                yield from expr_queries(item)
        elif isinstance(e, Like):
            yield from expr_queries(e.expr)
            yield from expr_queries(e.pattern)
        elif isinstance(e, Between):
            yield from expr_queries(e.expr)
            yield from expr_queries(e.low)
            yield from expr_queries(e.high)
        elif isinstance(e, Case):
            if e.operand is not None:
                yield from expr_queries(e.operand)
            for cond, res in e.whens:
                yield from expr_queries(cond)
                yield from expr_queries(res)
            if e.else_ is not None:
                yield from expr_queries(e.else_)
        elif isinstance(e, Cast):
            yield from expr_queries(e.expr)
        elif isinstance(e, FuncCall):
            for a in e.args:
                yield from expr_queries(a)
            if e.window is not None:
                for p in e.window.partition_by:
                    yield from expr_queries(p)
                for o in e.window.order_by:
                    yield from expr_queries(o.expr)

    def body_queries(body: Body):
        if isinstance(body, SelectCore):
            for item in body.items:
                yield from expr_queries(item.expr)
            if body.from_ is not None:
                yield from from_exprs(body.from_)
            if body.where is not None:
                yield from expr_queries(body.where)
            for g in body.group_by:
                yield from expr_queries(g)
            if body.having is not None:
                yield from expr_queries(body.having)
        elif isinstance(body, SetOp):
            yield from body_queries(body.left)
            yield from body_queries(body.right)
        else:  # parenthesized Query arm
            yield body, "arm"

    yield from body_queries(q.body)
    for o in q.order_by:
        yield from expr_queries(o.expr)
