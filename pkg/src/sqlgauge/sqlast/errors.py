"""Errors raised by SQL parsing, normalization and classification."""

from __future__ import annotations


class SqlAstError(Exception):
    """Base class for all sqlast errors."""


class ParseError(SqlAstError):
    """Input text is not a well-formed query in the supported grammar."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at byte {pos})")
        self.message = message
        self.pos = pos


class UnsupportedConstruct(SqlAstError):
    """Statement is syntactically SQL but outside the SELECT/CTE-SELECT subset."""

    def __init__(self, message: str, pos: int = 0):
        super().__init__(message)
        self.message = message
        self.pos = pos


class AmbiguousColumn(SqlAstError):
    """An unqualified column cannot be resolved to a single FROM table."""

    def __init__(self, column: str, candidates: list[str]):
        super().__init__(
            f"column '{column}' is ambiguous among tables: {', '.join(candidates)}"
        )
        self.column = column
        self.candidates = candidates
