"""Recursive-descent parser for single SELECT-form statements.

Grammar coverage: SELECT cores with DISTINCT, expression select items and
star items; FROM with explicit joins (INNER/LEFT/RIGHT/FULL/CROSS), comma
joins, and derived tables; WHERE/GROUP BY/HAVING; compound queries with
UNION [ALL] / INTERSECT / EXCEPT; WITH [RECURSIVE] CTE lists; ORDER BY,
LIMIT/OFFSET (both spellings); subqueries in expressions (scalar, IN,
EXISTS, ANY/ALL); CASE, CAST, LIKE/BETWEEN/IN-list/IS NULL; window
functions with PARTITION BY, ORDER BY and ROWS/RANGE frames.

DDL/DML and multi-statement input are rejected.
"""

from __future__ import annotations

from . import lexer
from .errors import ParseError, UnsupportedConstruct
from .lexer import EOF, FLOAT, INT, NAME, OP, STRING, Token
from .nodes import (
    Between, Bound, Binary, Case, Cast, ColumnRef, Cte, Exists, Frame,
    FromItem, FuncCall, InList, InSubquery, IsNull, Join, Like, Literal,
    OrderItem, Quantified, Query, QueryAst, ScalarSubquery, SelectCore,
    SelectItem, SetOp, Star, SubqueryTable, TableRef, Unary, WindowSpec,
)

DIALECTS = ("sqlite", "mysql")

# Words that terminate an implicit (AS-less) alias position.
_NON_ALIAS_WORDS = {
    "FROM", "WHERE", "GROUP", "HAVING", "ORDER", "LIMIT", "OFFSET", "UNION",
    "INTERSECT", "EXCEPT", "ON", "USING", "JOIN", "INNER", "LEFT", "RIGHT",
    "FULL", "CROSS", "NATURAL", "AND", "OR", "NOT", "AS", "WHEN", "THEN",
    "ELSE", "END", "BY", "ASC", "DESC", "IN", "IS", "LIKE", "BETWEEN",
    "EXISTS", "CASE", "WINDOW", "SET",
}

_STATEMENT_WORDS = {
    "INSERT", "UPDATE", "DELETE", "CREATE", "DROP", "ALTER", "REPLACE",
    "PRAGMA", "ATTACH", "DETACH", "VACUUM", "ANALYZE", "EXPLAIN", "BEGIN",
    "COMMIT", "ROLLBACK",
}


def parse_sql(text: str, dialect: str = "sqlite") -> QueryAst:
    """Parse one SELECT-form statement into a QueryAst."""
    if dialect not in DIALECTS:
        raise ValueError(f"unknown dialect {dialect!r}")
    if not text or not text.strip():
        raise ParseError("empty input", 0)
    tokens = lexer.tokenize(text, dialect)
    first = tokens[0]
    if first.kind == NAME and first.text.upper() in _STATEMENT_WORDS:
        raise UnsupportedConstruct(
            f"unsupported statement kind: {first.text.upper()}", first.pos
        )
    p = _Parser(tokens, text)
    query = p.parse_query()
    p.expect_end()
    return QueryAst(root=query, dialect=dialect, source_text=text)


class _Parser:
    def __init__(self, tokens: list[Token], text: str):
        self.tokens = tokens
        self.text = text
        self.i = 0

    # -- token plumbing ------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != EOF:
            self.i += 1
        return tok

    def at_kw(self, *words: str) -> bool:
        return self.peek().is_kw(*words)

    def eat_kw(self, *words: str) -> bool:
        if self.at_kw(*words):
            self.next()
            return True
        return False

    def expect_kw(self, word: str) -> Token:
        tok = self.peek()
        if not tok.is_kw(word):
            raise ParseError(f"expected {word}, found {tok.text or 'end of input'!r}", tok.pos)
        return self.next()

    def at_op(self, op: str) -> bool:
        tok = self.peek()
        return tok.kind == OP and tok.text == op

    def eat_op(self, op: str) -> bool:
        if self.at_op(op):
            self.next()
            return True
        return False

    def expect_op(self, op: str) -> Token:
        tok = self.peek()
        if not (tok.kind == OP and tok.text == op):
            raise ParseError(f"expected {op!r}, found {tok.text or 'end of input'!r}", tok.pos)
        return self.next()

    def expect_name(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != NAME:
            raise ParseError(f"expected {what}, found {tok.text or 'end of input'!r}", tok.pos)
        return self.next()

    def expect_end(self) -> None:
        if self.eat_op(";"):
            pass
        tok = self.peek()
        if tok.kind != EOF:
            raise ParseError(
                "multiple statements are not supported"
                if tok.is_kw("SELECT", "WITH") or tok.text == ";"
                else f"unexpected trailing input {tok.text!r}",
                tok.pos,
            )

    # -- query level ---------------------------------------------------

    def parse_query(self) -> Query:
        ctes: tuple[Cte, ...] = ()
        recursive = False
        if self.at_kw("WITH"):
            self.next()
            recursive = self.eat_kw("RECURSIVE")
            cte_list = [self.parse_cte()]
            while self.eat_op(","):
                cte_list.append(self.parse_cte())
            ctes = tuple(cte_list)
        body = self.parse_compound()
        order_by: tuple[OrderItem, ...] = ()
        limit = offset = None
        if self.at_kw("ORDER"):
            self.next()
            self.expect_kw("BY")
            order_by = tuple(self.parse_order_items())
        if self.at_kw("LIMIT"):
            self.next()
            limit = self.parse_expr()
            if self.eat_op(","):  # LIMIT offset, count
                offset = limit
                limit = self.parse_expr()
            elif self.at_kw("OFFSET"):
                self.next()
                offset = self.parse_expr()
        return Query(
            body=body, ctes=ctes, recursive=recursive,
            order_by=order_by, limit=limit, offset=offset,
        )

    def parse_cte(self) -> Cte:
        name = self.expect_name("CTE name").text
        columns: tuple[str, ...] = ()
        if self.at_op("("):
            # Either a column list or directly AS; column list only before AS.
            self.next()
            cols = [self.expect_name("column name").text]
            while self.eat_op(","):
                cols.append(self.expect_name("column name").text)
            self.expect_op(")")
            columns = tuple(cols)
        self.expect_kw("AS")
        self.expect_op("(")
        query = self.parse_query()
        self.expect_op(")")
        return Cte(name=name, query=query, columns=columns)

    def parse_compound(self):
        left = self.parse_select_core_or_paren()
        while True:
            if self.at_kw("UNION"):
                self.next()
                op = "union_all" if self.eat_kw("ALL") else "union"
            elif self.at_kw("INTERSECT"):
                self.next()
                op = "intersect"
            elif self.at_kw("EXCEPT"):
                self.next()
                op = "except"
            else:
                return left
            right = self.parse_select_core_or_paren()
            left = SetOp(op=op, left=left, right=right)

    def parse_select_core_or_paren(self):
        if self.at_op("("):
            self.next()
            q = self.parse_query()
            self.expect_op(")")
            return q
        return self.parse_select_core()

    def parse_select_core(self) -> SelectCore:
        self.expect_kw("SELECT")
        distinct = False
        if self.eat_kw("DISTINCT"):
            distinct = True
        else:
            self.eat_kw("ALL")
        items = [self.parse_select_item()]
        while self.eat_op(","):
            items.append(self.parse_select_item())
        from_ = None
        if self.eat_kw("FROM"):
            from_ = self.parse_from()
        where = None
        if self.eat_kw("WHERE"):
            where = self.parse_expr()
        group_by: tuple = ()
        if self.at_kw("GROUP"):
            self.next()
            self.expect_kw("BY")
            keys = [self.parse_expr()]
            while self.eat_op(","):
                keys.append(self.parse_expr())
            group_by = tuple(keys)
        having = None
        if self.eat_kw("HAVING"):
            having = self.parse_expr()
        return SelectCore(
            items=tuple(items), distinct=distinct, from_=from_,
            where=where, group_by=group_by, having=having,
        )

    def parse_select_item(self) -> SelectItem:
        if self.at_op("*"):
            self.next()
            return SelectItem(expr=Star(table=None))
        # qualified star: name '.' '*'
        if (
            self.peek().kind == NAME
            and self.peek(1).kind == OP and self.peek(1).text == "."
            and self.peek(2).kind == OP and self.peek(2).text == "*"
        ):
            table = self.next().text
            self.next()
            self.next()
            return SelectItem(expr=Star(table=table))
        expr = self.parse_expr()
        alias = None
        if self.eat_kw("AS"):
            alias = self.expect_name("alias").text
        elif self.peek().kind == NAME and self.peek().text.upper() not in _NON_ALIAS_WORDS:
            alias = self.next().text
        return SelectItem(expr=expr, alias=alias)

    # -- FROM clause -----------------------------------------------------

    def parse_from(self) -> FromItem:
        left = self.parse_table_or_subquery()
        while True:
            if self.eat_op(","):
                right = self.parse_table_or_subquery()
                left = Join(kind="comma", left=left, right=right)
                continue
            kind = self.parse_join_kind()
            if kind is None:
                return left
            right = self.parse_table_or_subquery()
            on = None
            using: tuple[str, ...] = ()
            if self.eat_kw("ON"):
                on = self.parse_expr()
            elif self.eat_kw("USING"):
                self.expect_op("(")
                cols = [self.expect_name("column name").text]
                while self.eat_op(","):
                    cols.append(self.expect_name("column name").text)
                self.expect_op(")")
                using = tuple(cols)
            left = Join(kind=kind, left=left, right=right, on=on, using=using)

    def parse_join_kind(self) -> str | None:
        if self.at_kw("JOIN"):
            self.next()
            return "inner"
        if self.at_kw("INNER"):
            self.next()
            self.expect_kw("JOIN")
            return "inner"
        if self.at_kw("CROSS"):
            self.next()
            self.expect_kw("JOIN")
            return "cross"
        for word, kind in (("LEFT", "left"), ("RIGHT", "right"), ("FULL", "full")):
            if self.at_kw(word):
                self.next()
                self.eat_kw("OUTER")
                self.expect_kw("JOIN")
                return kind
        return None

    def parse_table_or_subquery(self) -> FromItem:
        if self.at_op("("):
            self.next()
            q = self.parse_query()
            self.expect_op(")")
            alias = self.parse_opt_alias()
            return SubqueryTable(query=q, alias=alias)
        name = self.expect_name("table name").text
        alias = self.parse_opt_alias()
        return TableRef(name=name, alias=alias)

    def parse_opt_alias(self) -> str | None:
        if self.eat_kw("AS"):
            return self.expect_name("alias").text
        if self.peek().kind == NAME and self.peek().text.upper() not in _NON_ALIAS_WORDS:
            return self.next().text
        return None

    def parse_order_items(self) -> list[OrderItem]:
        items = [self.parse_order_item()]
        while self.eat_op(","):
            items.append(self.parse_order_item())
        return items

    def parse_order_item(self) -> OrderItem:
        expr = self.parse_expr()
        desc = False
        if self.eat_kw("DESC"):
            desc = True
        else:
            self.eat_kw("ASC")
        return OrderItem(expr=expr, desc=desc)

    # -- expressions -----------------------------------------------------

    def parse_expr(self):
        return self.parse_or()

    def parse_or(self):
        left = self.parse_and()
        while self.at_kw("OR"):
            self.next()
            left = Binary(op="or", left=left, right=self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.at_kw("AND"):
            self.next()
            left = Binary(op="and", left=left, right=self.parse_not())
        return left

    def parse_not(self):
        if self.at_kw("NOT") and not self.peek(1).is_kw("EXISTS"):
            self.next()
            return Unary(op="not", operand=self.parse_not())
        return self.parse_predicate()

    def parse_predicate(self):
        left = self.parse_concat()
        while True:
            negated = False
            if self.at_kw("NOT") and self.peek(1).is_kw("IN", "LIKE", "BETWEEN"):
                self.next()
                negated = True
            if self.at_kw("IS"):
                self.next()
                neg = self.eat_kw("NOT")
                self.expect_kw("NULL")
                left = IsNull(operand=left, negated=neg)
                continue
            if self.at_kw("IN"):
                self.next()
                self.expect_op("(")
                if self.at_kw("SELECT", "WITH"):
                    q = self.parse_query()
                    self.expect_op(")")
                    left = InSubquery(expr=left, query=q, negated=negated)
                else:
                    items = [self.parse_expr()]
                    while self.eat_op(","):
                        items.append(self.parse_expr())
                    self.expect_op(")")
                    left = InList(expr=left, items=tuple(items), negated=negated)
                continue
            if self.at_kw("LIKE"):
                self.next()
                pattern = self.parse_concat()
                escape = None
                if self.eat_kw("ESCAPE"):
                    escape = self.parse_concat()
                left = Like(expr=left, pattern=pattern, negated=negated, escape=escape)
                continue
            if self.at_kw("BETWEEN"):
                self.next()
                low = self.parse_concat()
                self.expect_kw("AND")
                high = self.parse_concat()
                left = Between(expr=left, low=low, high=high, negated=negated)
                continue
            if negated:
                tok = self.peek()
                raise ParseError(f"expected IN, LIKE or BETWEEN after NOT", tok.pos)
            op = self.peek_comparison()
            if op is None:
                return left
            self.next()
            if self.at_kw("ANY", "SOME", "ALL"):
                quant = "all" if self.next().text.upper() == "ALL" else "any"
                self.expect_op("(")
                q = self.parse_query()
                self.expect_op(")")
                left = Quantified(op=op, quantifier=quant, expr=left, query=q)
            else:
                left = Binary(op=op, left=left, right=self.parse_concat())

    def peek_comparison(self) -> str | None:
        tok = self.peek()
        if tok.kind == OP and tok.text in ("=", "!=", "<>", "<", ">", "<=", ">="):
            return "!=" if tok.text == "<>" else tok.text
        return None

    def parse_concat(self):
        left = self.parse_additive()
        while self.at_op("||"):
            self.next()
            left = Binary(op="||", left=left, right=self.parse_additive())
        return left

    def parse_additive(self):
        left = self.parse_multiplicative()
        while self.peek().kind == OP and self.peek().text in ("+", "-"):
            op = self.next().text
            left = Binary(op=op, left=left, right=self.parse_multiplicative())
        return left

    def parse_multiplicative(self):
        left = self.parse_unary()
        while self.peek().kind == OP and self.peek().text in ("*", "/", "%"):
            op = self.next().text
            left = Binary(op=op, left=left, right=self.parse_unary())
        return left

    def parse_unary(self):
        if self.peek().kind == OP and self.peek().text in ("-", "+"):
            op = self.next().text
            return Unary(op=op, operand=self.parse_unary())
        return self.parse_primary()

    def parse_primary(self):
        tok = self.peek()
        if tok.kind == INT:
            self.next()
            return Literal(kind="int", value=int(tok.text))
        if tok.kind == FLOAT:
            self.next()
            return Literal(kind="float", value=float(tok.text))
        if tok.kind == STRING:
            self.next()
            return Literal(kind="string", value=tok.text)
        if tok.kind == OP and tok.text == "(":
            self.next()
            if self.at_kw("SELECT", "WITH"):
                q = self.parse_query()
                self.expect_op(")")
                return ScalarSubquery(query=q)
            e = self.parse_expr()
            self.expect_op(")")
            return e
        if tok.kind != NAME:
            raise ParseError(f"expected expression, found {tok.text or 'end of input'!r}", tok.pos)

        upper = tok.text.upper()
        if upper == "NULL":
            self.next()
            return Literal(kind="null", value=None)
        if upper in ("TRUE", "FALSE"):
            self.next()
            return Literal(kind="bool", value=(upper == "TRUE"))
        if upper == "NOT" and self.peek(1).is_kw("EXISTS"):
            self.next()
            self.next()
            self.expect_op("(")
            q = self.parse_query()
            self.expect_op(")")
            return Exists(query=q, negated=True)
        if upper == "EXISTS":
            self.next()
            self.expect_op("(")
            q = self.parse_query()
            self.expect_op(")")
            return Exists(query=q)
        if upper == "CASE":
            return self.parse_case()
        if upper == "CAST":
            self.next()
            self.expect_op("(")
            e = self.parse_expr()
            self.expect_kw("AS")
            type_name = self.expect_name("type name").text
            # allow e.g. VARCHAR(10)
            if self.at_op("("):
                self.next()
                while not self.at_op(")"):
                    self.next()
                self.next()
            self.expect_op(")")
            return Cast(expr=e, type_name=type_name.lower())
        if upper in ("SELECT", "WITH", "FROM", "WHERE"):
            raise ParseError(f"expected expression, found {tok.text!r}", tok.pos)

        # function call?
        if self.peek(1).kind == OP and self.peek(1).text == "(":
            return self.parse_func_call()
        # column reference, possibly qualified
        name = self.next().text
        if self.at_op("."):
            self.next()
            col = self.expect_name("column name").text
            return ColumnRef(table=name, name=col)
        return ColumnRef(table=None, name=name)

    def parse_case(self) -> Case:
        self.expect_kw("CASE")
        operand = None
        if not self.at_kw("WHEN"):
            operand = self.parse_expr()
        whens = []
        while self.eat_kw("WHEN"):
            cond = self.parse_expr()
            self.expect_kw("THEN")
            result = self.parse_expr()
            whens.append((cond, result))
        if not whens:
            raise ParseError("CASE requires at least one WHEN", self.peek().pos)
        else_ = None
        if self.eat_kw("ELSE"):
            else_ = self.parse_expr()
        self.expect_kw("END")
        return Case(operand=operand, whens=tuple(whens), else_=else_)

    def parse_func_call(self) -> FuncCall:
        name = self.next().text
        self.expect_op("(")
        distinct = False
        star = False
        args: tuple = ()
        if self.at_op("*"):
            self.next()
            star = True
        elif not self.at_op(")"):
            distinct = self.eat_kw("DISTINCT")
            arg_list = [self.parse_expr()]
            while self.eat_op(","):
                arg_list.append(self.parse_expr())
            args = tuple(arg_list)
        self.expect_op(")")
        window = None
        if self.at_kw("OVER"):
            self.next()
            window = self.parse_window()
        return FuncCall(name=name, args=args, distinct=distinct, star=star, window=window)

    def parse_window(self) -> WindowSpec:
        self.expect_op("(")
        partition: tuple = ()
        order: tuple = ()
        frame = None
        if self.at_kw("PARTITION"):
            self.next()
            self.expect_kw("BY")
            parts = [self.parse_expr()]
            while self.eat_op(","):
                parts.append(self.parse_expr())
            partition = tuple(parts)
        if self.at_kw("ORDER"):
            self.next()
            self.expect_kw("BY")
            order = tuple(self.parse_order_items())
        if self.at_kw("ROWS", "RANGE"):
            unit = self.next().text.lower()
            if self.eat_kw("BETWEEN"):
                start = self.parse_frame_bound()
                self.expect_kw("AND")
                end = self.parse_frame_bound()
            else:
                start = self.parse_frame_bound()
                end = None
            frame = Frame(unit=unit, start=start, end=end)
        self.expect_op(")")
        return WindowSpec(partition_by=partition, order_by=order, frame=frame)

    def parse_frame_bound(self) -> Bound:
        if self.at_kw("UNBOUNDED"):
            self.next()
            if self.eat_kw("PRECEDING"):
                return Bound(kind="unbounded_preceding")
            self.expect_kw("FOLLOWING")
            return Bound(kind="unbounded_following")
        if self.at_kw("CURRENT"):
            self.next()
            self.expect_kw("ROW")
            return Bound(kind="current")
        value = self.parse_expr()
        if self.eat_kw("PRECEDING"):
            return Bound(kind="preceding", value=value)
        self.expect_kw("FOLLOWING")
        return Bound(kind="following", value=value)
