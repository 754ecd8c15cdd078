"""Read-only query execution and timing against sqlite databases."""

from __future__ import annotations

import sqlite3
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

from ..sqlast import ParseError, UnsupportedConstruct, parse_sql

DEFAULT_ROW_CAP = 100_000
DEFAULT_TIMEOUT_MS = 30_000


class ExecError(Exception):
    """The engine rejected or failed the query."""


class QueryTimeout(ExecError):
    """The query exceeded its wall-clock budget."""


class DbConnectError(Exception):
    """The database file could not be opened."""


@dataclass(frozen=True)
class ResultTable:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    ordered: bool = False
    truncated: bool = False

    @property
    def n_rows(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class TimingStats:
    samples_ms: tuple[float, ...]
    median_ms: float | None
    timeout: bool = False


def _open_ro(db_path: str | Path) -> sqlite3.Connection:
    p = Path(db_path)
    if not p.exists():
        raise DbConnectError(f"database file not found: {p}")
    try:
        conn = sqlite3.connect(f"file:{p}?mode=ro", uri=True)
        conn.execute("PRAGMA query_only = ON")
        return conn
    except sqlite3.Error as exc:
        raise DbConnectError(f"cannot open {p}: {exc}")


def _install_deadline(conn: sqlite3.Connection, timeout_ms: int) -> list[bool]:
    deadline = time.monotonic() + timeout_ms / 1000.0
    tripped = [False]

    def check() -> int:
        if time.monotonic() > deadline:
            tripped[0] = True
            return 1  # non-zero aborts the statement
        return 0

    conn.set_progress_handler(check, 2000)
    return tripped


def query_is_ordered(sql: str) -> bool:
    """True when the query carries a top-level ORDER BY."""
    try:
        tree = parse_sql(sql)
    except (ParseError, UnsupportedConstruct):
        return False
    return bool(tree.root.order_by)


def execute_query(db_path: str | Path, sql: str, *,
                  row_cap: int = DEFAULT_ROW_CAP,
                  timeout_ms: int = DEFAULT_TIMEOUT_MS) -> ResultTable:
    """Run *sql* read-only and materialize up to *row_cap* rows."""
    conn = _open_ro(db_path)
    tripped = _install_deadline(conn, timeout_ms)
    try:
        cur = conn.execute(sql)
        columns = tuple(d[0] for d in cur.description) if cur.description else ()
        rows = cur.fetchmany(row_cap)
        truncated = False
        if len(rows) == row_cap and cur.fetchone() is not None:
            truncated = True
        return ResultTable(columns=columns,
                           rows=tuple(tuple(r) for r in rows),
                           ordered=query_is_ordered(sql),
                           truncated=truncated)
    except sqlite3.OperationalError as exc:
        if tripped[0] or "interrupted" in str(exc):
            raise QueryTimeout(f"query exceeded {timeout_ms} ms")
        raise ExecError(str(exc))
    except sqlite3.Error as exc:
        raise ExecError(str(exc))
    finally:
        conn.close()


def measure_time(db_path: str | Path, sql: str, *,
                 repetitions: int = 5,
                 row_cap: int = DEFAULT_ROW_CAP,
                 timeout_ms: int = DEFAULT_TIMEOUT_MS) -> TimingStats:
    """Median wall-clock of *repetitions* runs after one untimed warm-up."""
    try:
        execute_query(db_path, sql, row_cap=row_cap, timeout_ms=timeout_ms)
    except QueryTimeout:
        return TimingStats(samples_ms=(), median_ms=None, timeout=True)

    samples: list[float] = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        try:
            execute_query(db_path, sql, row_cap=row_cap, timeout_ms=timeout_ms)
        except QueryTimeout:
            return TimingStats(samples_ms=tuple(samples), median_ms=None,
                               timeout=True)
        samples.append((time.perf_counter() - t0) * 1000.0)
    return TimingStats(samples_ms=tuple(samples),
                       median_ms=statistics.median(samples), timeout=False)
