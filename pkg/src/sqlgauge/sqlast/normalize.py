"""Canonicalize parsed queries for structural comparison.

The normal form is what makes structural equality meaningful: two queries
that differ only in spelling (case, aliases, conjunct order, commutative
operand order, positional references) map to the same tree.

Transformations, in dependency order per SELECT core:

* FROM sources get canonical names. Base tables become their lowercased
  table name; when the same table appears more than once in one FROM the
  occurrences are numbered ``emp#1``, ``emp#2`` in order of appearance.
  Derived tables become ``sub#j`` by position, CTEs become ``cte#k`` by
  definition order in their WITH list. All aliases are resolved to these
  canonical names and then dropped.
* Column references are resolved against the scope chain (innermost SELECT
  first, then enclosing queries for correlated subqueries). Unqualified
  columns are qualified when a unique source claims them — via the supplied
  schema for base tables, or the computed output columns of derived tables
  and CTEs. An unqualified column that several sources could claim either
  raises AmbiguousColumn (``on_ambiguous="raise"``, the default) or is left
  unqualified (``"keep"``, used for structural match where both sides get
  the same treatment).
* Derived-table and CTE output columns get canonical names: the underlying
  column name when the item is a plain column, otherwise ``c<j>`` by
  position. References through any alias converge on those names.
* Positional integers and select-item aliases in GROUP BY / HAVING /
  ORDER BY are replaced by the expressions they denote; select aliases are
  then dropped.
* AND/OR chains flatten into sorted, deduplicated NaryBool nodes;
  operands of commutative operators (=, !=, +, *) are sorted; IN-lists are
  sorted and deduplicated; window PARTITION BY keys and GROUP BY keys are
  sorted. The sort key is always the rendered text of the operand.
* USING joins are rewritten to the equivalent ON equalities; CROSS JOIN
  is rewritten to a comma join (identical semantics); redundant
  parentheses around compound-query arms are removed.

normalize is idempotent: running it on an already-normal tree (including
NaryBool and Placeholder nodes, which the parser never emits) is a no-op.
"""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

from .errors import AmbiguousColumn
from .nodes import (
    Between, Binary, Bound, Case, Cast, ColumnRef, Cte, Exists, Frame,
    FromItem, FuncCall, InList, InSubquery, IsNull, Join, Like, Literal,
    NaryBool, NormalizedAst, OrderItem, Placeholder, Quantified, Query,
    QueryAst, ScalarSubquery, SelectCore, SelectItem, SetOp, Star,
    SubqueryTable, TableRef, Unary, WindowSpec,
)
from .render import render_expr

Schema = Mapping[str, Sequence[str]]

_MODES = ("raise", "keep")


class _Source:
    """One FROM-clause source: base table, derived table, or CTE reference."""

    __slots__ = ("key", "base_name", "canonical", "columns", "wildcard")

    def __init__(self, key, base_name, canonical, columns, wildcard):
        self.key = key              # name the query text may use (alias or name)
        self.base_name = base_name  # underlying table name, lowercased, or None
        self.canonical = canonical  # assigned canonical name
        self.columns = columns      # dict original column name -> canonical, or None
        self.wildcard = wildcard    # True when the column set is unknown


class _Scope:
    def __init__(self, sources):
        self.sources = sources


class _CteInfo:
    __slots__ = ("canonical", "ref_columns", "canon_columns", "wildcard")

    def __init__(self, canonical, ref_columns, canon_columns, wildcard):
        self.canonical = canonical
        self.ref_columns = ref_columns    # names usable in references, in order
        self.canon_columns = canon_columns
        self.wildcard = wildcard


class _Env:
    """Scope chain plus visible CTE definitions and the collected alias map."""

    def __init__(self, scope=None, ctes=None, parent=None,
                 schema=None, on_ambiguous="raise", alias_map=None):
        self.scope = scope
        self.ctes = ctes or {}
        self.parent = parent
        self.schema = schema
        self.on_ambiguous = on_ambiguous
        self.alias_map = alias_map if alias_map is not None else {}

    def child(self, scope=None, ctes=None):
        return _Env(scope=scope, ctes=ctes or {}, parent=self,
                    schema=self.schema, on_ambiguous=self.on_ambiguous,
                    alias_map=self.alias_map)

    def lookup_cte(self, name: str) -> Optional[_CteInfo]:
        env = self
        while env is not None:
            if name in env.ctes:
                return env.ctes[name]
            env = env.parent
        return None

    def scopes(self):
        env = self
        while env is not None:
            if env.scope is not None:
                yield env.scope
            env = env.parent


def normalize(q: QueryAst, schema: Optional[Schema] = None,
              on_ambiguous: str = "raise") -> NormalizedAst:
    """Normalize a parsed query. See the module docstring for the rules."""
    if on_ambiguous not in _MODES:
        raise ValueError(f"on_ambiguous must be one of {_MODES}")
    lowered = None
    if schema is not None:
        lowered = {
            t.lower(): [c.lower() for c in cols] for t, cols in schema.items()
        }
    env = _Env(schema=lowered, on_ambiguous=on_ambiguous)
    root = _norm_query(q.root, env)
    return NormalizedAst(root=root, dialect=q.dialect,
                         alias_map=dict(env.alias_map))


def normalized_tree(n: NormalizedAst) -> Query:
    return n.root


# -- query structure ---------------------------------------------------


def _norm_query(q: Query, env: _Env) -> Query:
    ctes = ()
    if q.ctes:
        cte_env = env.child()
        out = []
        for k, cte in enumerate(q.ctes, start=1):
            canonical = f"cte#{k}"
            body = _norm_query(cte.query, cte_env)
            ref_cols, canon_cols, wildcard = _output_columns(cte.query)
            if cte.columns:
                ref_cols = [c.lower() for c in cte.columns]
            info = _CteInfo(canonical, ref_cols, canon_cols, wildcard)
            # visible to later CTEs and (for the recursive case) to itself;
            # registered before a second pass so self-references resolve
            cte_env.ctes[cte.name.lower()] = info
            if _references_name(cte.query, cte.name):
                body = _norm_query(cte.query, cte_env)
            out.append(Cte(name=canonical, query=body, columns=()))
            env.alias_map[cte.name.lower()] = canonical
        ctes = tuple(out)
        env = cte_env

    body = _norm_body(q.body, env)

    if isinstance(body, SelectCore) and isinstance(q.body, SelectCore):
        order_by = _norm_order_with_core(q, env)
    else:
        order_by = tuple(
            OrderItem(expr=_norm_expr(_subst_output_refs(o.expr, q.body), env),
                      desc=o.desc)
            for o in q.order_by
        ) if q.order_by else ()

    limit = _norm_expr(q.limit, env) if q.limit is not None else None
    offset = _norm_expr(q.offset, env) if q.offset is not None else None
    return Query(body=body, ctes=ctes, recursive=q.recursive and bool(ctes),
                 order_by=order_by, limit=limit, offset=offset)


def _norm_order_with_core(q: Query, env: _Env) -> tuple:
    """Resolve query-level ORDER BY inside the core's own scope."""
    if not q.order_by:
        return ()
    raw_core = q.body
    scope = _build_scope(raw_core.from_, env)
    inner = env.child(scope=scope)
    items = []
    for o in q.order_by:
        expr = _subst_positional(o.expr, raw_core.items)
        expr = _subst_alias_refs(expr, raw_core.items)
        items.append(OrderItem(expr=_norm_expr(expr, inner), desc=o.desc))
    return tuple(items)


def _norm_body(body, env: _Env):
    if isinstance(body, Query):
        # parenthesized arm; drop the wrapper when it is pure grouping
        if not body.ctes and not body.order_by and body.limit is None:
            return _norm_body(body.body, env)
        return _norm_query(body, env)
    if isinstance(body, SetOp):
        return SetOp(op=body.op, left=_norm_body(body.left, env),
                     right=_norm_body(body.right, env))
    return _norm_core(body, env)


def _norm_core(core: SelectCore, env: _Env) -> SelectCore:
    scope = _build_scope(core.from_, env)
    inner = env.child(scope=scope)

    from_ = _norm_from(core.from_, scope, inner) if core.from_ is not None else None

    items = tuple(
        SelectItem(expr=_norm_expr(it.expr, inner), alias=None)
        for it in core.items
    )
    where = _norm_expr(core.where, inner) if core.where is not None else None

    group_by = ()
    if core.group_by:
        keys = []
        for key in core.group_by:
            key = _subst_positional(key, core.items)
            key = _subst_alias_refs(key, core.items)
            keys.append(_norm_expr(key, inner))
        group_by = tuple(sorted(keys, key=render_expr))

    having = None
    if core.having is not None:
        having = _norm_expr(_subst_alias_refs(core.having, core.items), inner)

    return SelectCore(items=items, distinct=core.distinct, from_=from_,
                      where=where, group_by=group_by, having=having)


# -- FROM scope construction -------------------------------------------


def _flat_sources(item: Optional[FromItem]):
    """FROM sources in textual order."""
    if item is None:
        return
    if isinstance(item, Join):
        yield from _flat_sources(item.left)
        yield from _flat_sources(item.right)
    else:
        yield item


def _build_scope(from_: Optional[FromItem], env: _Env) -> _Scope:
    raw = list(_flat_sources(from_))
    # occurrence counts for base-table canonical numbering
    totals: dict = {}
    for src in raw:
        if isinstance(src, TableRef) and env.lookup_cte(src.name.lower()) is None:
            name = src.name.lower()
            totals[name] = totals.get(name, 0) + 1

    sources = []
    seen: dict = {}
    sub_index = 0
    for src in raw:
        if isinstance(src, TableRef):
            name = src.name.lower()
            cte = env.lookup_cte(name)
            if cte is not None:
                canonical = cte.canonical
                columns = dict(zip(cte.ref_columns, cte.canon_columns))
                wildcard = cte.wildcard
                base = None
            else:
                seen[name] = seen.get(name, 0) + 1
                canonical = f"{name}#{seen[name]}" if totals[name] > 1 else name
                if env.schema is not None and name in env.schema:
                    columns = {c: c for c in env.schema[name]}
                    wildcard = False
                else:
                    columns = {}
                    wildcard = True
                base = name
            key = src.alias.lower() if src.alias else name
            sources.append(_Source(key, base, canonical, columns, wildcard))
            env.alias_map[key] = canonical
        else:  # SubqueryTable
            sub_index += 1
            canonical = f"sub#{sub_index}"
            ref_cols, canon_cols, wildcard = _output_columns(src.query)
            columns = dict(zip(ref_cols, canon_cols))
            key = src.alias.lower() if src.alias else canonical
            sources.append(_Source(key, None, canonical, columns, wildcard))
            env.alias_map[key] = canonical
    return _Scope(sources)


def _output_columns(raw_query: Query):
    """(reference names, canonical names, wildcard) of a query's output.

    Reference names are what outer queries may use (alias, else column
    name); canonical names are what normalization rewrites them to (column
    name for plain columns, positional c<j> otherwise). Output lists come
    from the first SELECT core of the body.
    """
    core = _first_core(raw_query)
    if core is None:
        return [], [], True
    ref, canon, wildcard = [], [], False
    for j, item in enumerate(core.items, start=1):
        if isinstance(item.expr, Star):
            wildcard = True
            continue
        underlying = item.expr.name.lower() if isinstance(item.expr, ColumnRef) else f"c{j}"
        ref.append(item.alias.lower() if item.alias else underlying)
        canon.append(underlying)
    return ref, canon, wildcard


def _first_core(q: Query) -> Optional[SelectCore]:
    body = q.body
    while True:
        if isinstance(body, SelectCore):
            return body
        if isinstance(body, SetOp):
            body = body.left
        elif isinstance(body, Query):
            body = body.body
        else:
            return None


def _references_name(q: Query, name: str) -> bool:
    target = name.lower()
    def walk_from(item):
        if item is None:
            return False
        if isinstance(item, Join):
            return walk_from(item.left) or walk_from(item.right)
        if isinstance(item, TableRef):
            return item.name.lower() == target
        return walk_query(item.query)
    def walk_body(body):
        if isinstance(body, SelectCore):
            return walk_from(body.from_)
        if isinstance(body, SetOp):
            return walk_body(body.left) or walk_body(body.right)
        return walk_query(body)
    def walk_query(query):
        return any(walk_query(c.query) for c in query.ctes) or walk_body(query.body)
    return walk_query(q)


def _norm_from(item: FromItem, scope: _Scope, inner: _Env) -> FromItem:
    position = {"i": 0}

    def walk(node):
        if isinstance(node, Join):
            left = walk(node.left)
            right = walk(node.right)
            kind = "comma" if node.kind == "cross" else node.kind
            on = node.on
            if node.using:
                on = _using_to_on(node.using, node, scope)
            if on is not None:
                on = _norm_expr(on, inner)
            return Join(kind=kind, left=left, right=right, on=on, using=())
        src = scope.sources[position["i"]]
        position["i"] += 1
        if isinstance(node, TableRef):
            # Keep the real table name; the disambiguator (customer#1) moves
            # into the alias slot so a re-parse still sees a self-join.
            if src.base_name is not None and src.canonical != src.base_name:
                return TableRef(name=src.base_name, alias=src.canonical)
            return TableRef(name=src.canonical, alias=None)
        return SubqueryTable(query=_norm_query(node.query, inner.parent or inner),
                             alias=None)

    return walk(item)


def _using_to_on(columns, join: Join, scope: _Scope):
    """Rewrite USING (c, …) as the ON equalities it abbreviates."""
    left_keys = {s.key for s in _scope_slice(join.left, scope)}
    right_keys = {s.key for s in _scope_slice(join.right, scope)}

    def side_ref(keys, col):
        candidates = [s for s in scope.sources if s.key in keys
                      and (s.wildcard or col in s.columns)]
        if not candidates:
            candidates = [s for s in scope.sources if s.key in keys]
        chosen = candidates[-1]
        return ColumnRef(table=chosen.key, name=col)

    conds = []
    for col in columns:
        c = col.lower()
        conds.append(Binary(op="=", left=side_ref(left_keys, c),
                            right=side_ref(right_keys, c)))
    out = conds[0]
    for extra in conds[1:]:
        out = Binary(op="and", left=out, right=extra)
    return out


def _scope_slice(item: FromItem, scope: _Scope):
    """Scope sources corresponding to one side of a join node."""
    flat = list(_flat_sources(item))
    keys = []
    for raw in flat:
        if isinstance(raw, TableRef):
            keys.append(raw.alias.lower() if raw.alias else raw.name.lower())
        else:
            keys.append(raw.alias.lower() if raw.alias else None)
    out = []
    for src in scope.sources:
        if src.key in keys or (None in keys and src.canonical.startswith("sub#")):
            out.append(src)
    return out


# -- reference substitution (positional / select-alias) -----------------


def _subst_positional(expr, items):
    if isinstance(expr, Literal) and expr.kind == "int":
        j = expr.value
        if 1 <= j <= len(items) and not isinstance(items[j - 1].expr, Star):
            return items[j - 1].expr
    return expr


def _subst_alias_refs(expr, items):
    aliases = {it.alias.lower(): it.expr for it in items if it.alias}
    if not aliases:
        return expr
    def walk(e):
        if isinstance(e, ColumnRef) and e.table is None and e.name.lower() in aliases:
            return aliases[e.name.lower()]
        return _map_children(e, walk)
    return walk(expr)


def _map_children(e, fn):
    """Rebuild an expression with fn applied to each direct child expression.

    Does not descend into subqueries — their names live in their own scope.
    """
    if isinstance(e, Binary):
        return Binary(op=e.op, left=fn(e.left), right=fn(e.right))
    if isinstance(e, NaryBool):
        return NaryBool(op=e.op, items=tuple(fn(x) for x in e.items))
    if isinstance(e, Unary):
        return Unary(op=e.op, operand=fn(e.operand))
    if isinstance(e, IsNull):
        return IsNull(operand=fn(e.operand), negated=e.negated)
    if isinstance(e, InList):
        return InList(expr=fn(e.expr), items=tuple(fn(x) for x in e.items),
                      negated=e.negated)
    if isinstance(e, InSubquery):
        return InSubquery(expr=fn(e.expr), query=e.query, negated=e.negated)
    if isinstance(e, Like):
        return Like(expr=fn(e.expr), pattern=fn(e.pattern), negated=e.negated,
                    escape=fn(e.escape) if e.escape is not None else None)
    if isinstance(e, Between):
        return Between(expr=fn(e.expr), low=fn(e.low), high=fn(e.high),
                       negated=e.negated)
    if isinstance(e, Quantified):
        return Quantified(op=e.op, quantifier=e.quantifier, expr=fn(e.expr),
                          query=e.query)
    if isinstance(e, Case):
        return Case(
            operand=fn(e.operand) if e.operand is not None else None,
            whens=tuple((fn(c), fn(r)) for c, r in e.whens),
            else_=fn(e.else_) if e.else_ is not None else None,
        )
    if isinstance(e, Cast):
        return Cast(expr=fn(e.expr), type_name=e.type_name)
    if isinstance(e, FuncCall):
        window = e.window
        if window is not None:
            window = WindowSpec(
                partition_by=tuple(fn(x) for x in window.partition_by),
                order_by=tuple(OrderItem(expr=fn(o.expr), desc=o.desc)
                               for o in window.order_by),
                frame=window.frame,
            )
        return FuncCall(name=e.name, args=tuple(fn(a) for a in e.args),
                        distinct=e.distinct, star=e.star, window=window)
    return e


def _subst_output_refs(expr, body):
    """Positional/alias ORDER BY references over a compound body."""
    if isinstance(body, SetOp):
        core = body
        while isinstance(core, SetOp):
            core = core.left
        if isinstance(core, Query):
            core = _first_core(core)
        if isinstance(core, SelectCore):
            expr = _subst_positional(expr, core.items)
            expr = _subst_alias_refs(expr, core.items)
    return expr


# -- expression normalization -------------------------------------------


_COMMUTATIVE = ("=", "!=", "+", "*")


def _norm_expr(e, env: _Env):
    if e is None:
        return None
    if isinstance(e, Literal):
        return e
    if isinstance(e, Placeholder):
        return e
    if isinstance(e, ColumnRef):
        return _resolve_column(e, env)
    if isinstance(e, Star):
        if e.table is None:
            return e
        return Star(table=_canonical_table(e.table, env))
    if isinstance(e, Binary):
        if e.op in ("and", "or"):
            return _flatten_bool(e, env)
        left = _norm_expr(e.left, env)
        right = _norm_expr(e.right, env)
        if e.op in _COMMUTATIVE:
            left, right = sorted((left, right), key=render_expr)
        return Binary(op=e.op, left=left, right=right)
    if isinstance(e, NaryBool):
        return _flatten_bool(e, env)
    if isinstance(e, Unary):
        return Unary(op=e.op, operand=_norm_expr(e.operand, env))
    if isinstance(e, IsNull):
        return IsNull(operand=_norm_expr(e.operand, env), negated=e.negated)
    if isinstance(e, InList):
        items = [_norm_expr(x, env) for x in e.items]
        unique = {render_expr(x): x for x in items}
        ordered = tuple(unique[k] for k in sorted(unique))
        return InList(expr=_norm_expr(e.expr, env), items=ordered, negated=e.negated)
    if isinstance(e, InSubquery):
        return InSubquery(expr=_norm_expr(e.expr, env),
                          query=_norm_query(e.query, env), negated=e.negated)
    if isinstance(e, Like):
        return Like(expr=_norm_expr(e.expr, env),
                    pattern=_norm_expr(e.pattern, env), negated=e.negated,
                    escape=_norm_expr(e.escape, env) if e.escape is not None else None)
    if isinstance(e, Between):
        return Between(expr=_norm_expr(e.expr, env), low=_norm_expr(e.low, env),
                       high=_norm_expr(e.high, env), negated=e.negated)
    if isinstance(e, Exists):
        return Exists(query=_norm_query(e.query, env), negated=e.negated)
    if isinstance(e, ScalarSubquery):
        return ScalarSubquery(query=_norm_query(e.query, env))
    if isinstance(e, Quantified):
        return Quantified(op=e.op, quantifier=e.quantifier,
                          expr=_norm_expr(e.expr, env),
                          query=_norm_query(e.query, env))
    if isinstance(e, Case):
        return Case(
            operand=_norm_expr(e.operand, env) if e.operand is not None else None,
            whens=tuple((_norm_expr(c, env), _norm_expr(r, env)) for c, r in e.whens),
            else_=_norm_expr(e.else_, env) if e.else_ is not None else None,
        )
    if isinstance(e, Cast):
        return Cast(expr=_norm_expr(e.expr, env), type_name=e.type_name.lower())
    if isinstance(e, FuncCall):
        window = None
        if e.window is not None:
            window = WindowSpec(
                partition_by=tuple(sorted(
                    (_norm_expr(x, env) for x in e.window.partition_by),
                    key=render_expr)),
                order_by=tuple(
                    OrderItem(expr=_norm_expr(o.expr, env), desc=o.desc)
                    for o in e.window.order_by),
                frame=_norm_frame(e.window.frame, env),
            )
        return FuncCall(name=e.name.lower(),
                        args=tuple(_norm_expr(a, env) for a in e.args),
                        distinct=e.distinct, star=e.star, window=window)
    raise TypeError(f"cannot normalize node {e!r}")


def _norm_frame(frame: Optional[Frame], env: _Env) -> Optional[Frame]:
    if frame is None:
        return None
    def bound(b):
        if b is None or b.value is None:
            return b
        return Bound(kind=b.kind, value=_norm_expr(b.value, env))
    return Frame(unit=frame.unit, start=bound(frame.start), end=bound(frame.end))


def _flatten_bool(e, env: _Env):
    op = e.op
    items = []
    def collect(node):
        if isinstance(node, Binary) and node.op == op:
            collect(node.left)
            collect(node.right)
        elif isinstance(node, NaryBool) and node.op == op:
            for x in node.items:
                collect(x)
        else:
            items.append(_norm_expr(node, env))
    collect(e)
    unique = {render_expr(x): x for x in items}
    ordered = [unique[k] for k in sorted(unique)]
    if len(ordered) == 1:
        return ordered[0]
    return NaryBool(op=op, items=tuple(ordered))


# -- column resolution ---------------------------------------------------


def _canonical_table(name: str, env: _Env) -> str:
    key = name.lower()
    for scope in env.scopes():
        for src in scope.sources:
            if src.key == key:
                return src.canonical
        for src in scope.sources:
            if src.base_name == key:
                return src.canonical
    return key


def _resolve_column(ref: ColumnRef, env: _Env) -> ColumnRef:
    name = ref.name.lower()
    if ref.table is not None:
        key = ref.table.lower()
        for scope in env.scopes():
            for src in scope.sources:
                if src.key == key:
                    return ColumnRef(table=src.canonical,
                                     name=src.columns.get(name, name))
            for src in scope.sources:
                if src.base_name == key:
                    return ColumnRef(table=src.canonical,
                                     name=src.columns.get(name, name))
        return ColumnRef(table=key, name=name)

    for scope in env.scopes():
        known = [s for s in scope.sources if name in s.columns]
        if len(known) == 1:
            src = known[0]
            return ColumnRef(table=src.canonical, name=src.columns[name])
        if len(known) > 1:
            return _ambiguous(ref, known, env)
        wild = [s for s in scope.sources if s.wildcard]
        if len(wild) == 1:
            return ColumnRef(table=wild[0].canonical, name=name)
        if len(wild) > 1:
            return _ambiguous(ref, wild, env)
    return ColumnRef(table=None, name=name)


def _ambiguous(ref: ColumnRef, candidates, env: _Env) -> ColumnRef:
    if env.on_ambiguous == "raise":
        raise AmbiguousColumn(ref.name, [s.canonical for s in candidates])
    return ColumnRef(table=None, name=ref.name.lower())
