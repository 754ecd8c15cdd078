"""Near-miss repair search over result tables.

When execution accuracy fails, a bounded breadth-first search over a fixed
catalog of result-level transforms looks for the shortest sequences that
turn the candidate table into a match.  Suggestions are diagnostic — they
say *how* a candidate was wrong (columns swapped, extra ordering, stray
duplicates, over-precise floats, missing LIMIT), they never change the
metric itself.

Soundness: every returned sequence has been applied end-to-end and
re-checked for equality, and nothing is returned when the tables already
match.  All minimal-length fixes are reported, in catalog order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import permutations

from .datastore.executor import ResultTable
from .metrics import ComparisonPolicy, compare_result_tables

MAX_DEPTH = 2
_PERMUTATION_COLUMN_CAP = 8


@dataclass(frozen=True)
class Transform:
    name: str
    decimals: int | None = None

    @property
    def key(self) -> str:
        if self.decimals is None:
            return self.name
        return f"{self.name}({self.decimals})"


CATALOG: tuple[Transform, ...] = (
    Transform("column_reorder"),
    Transform("column_project"),
    Transform("row_dedup"),
    Transform("ignore_order"),
    Transform("round_values", 0),
    Transform("round_values", 2),
    Transform("round_values", 4),
    Transform("limit_truncate"),
)


@dataclass(frozen=True)
class RepairSuggestion:
    transforms: tuple[str, ...]

    def to_json(self) -> list[str]:
        return list(self.transforms)


def _column_values(table: ResultTable, idx: int) -> list[str]:
    return sorted(repr(row[idx]) for row in table.rows)


def _match_permutation(cand: ResultTable, ref: ResultTable) -> tuple[int, ...] | None:
    """Map each ref column position to a cand column position."""
    n = len(cand.columns)
    if n != len(ref.columns) or n > _PERMUTATION_COLUMN_CAP:
        return None
    # Try case-insensitive name matching first; it is authoritative when
    # both sides use each name exactly once.
    cand_names = [c.lower() for c in cand.columns]
    ref_names = [c.lower() for c in ref.columns]
    if sorted(cand_names) == sorted(ref_names) and \
            len(set(cand_names)) == n and len(set(ref_names)) == n:
        return tuple(cand_names.index(r) for r in ref_names)
    # Fall back to value-multiset matching, greedy left to right.
    cand_cols = [_column_values(cand, i) for i in range(n)]
    ref_cols = [_column_values(ref, i) for i in range(n)]
    used: set[int] = set()
    perm: list[int] = []
    for j in range(n):
        found = None
        for i in range(n):
            if i not in used and cand_cols[i] == ref_cols[j]:
                found = i
                break
        if found is None:
            return None
        used.add(found)
        perm.append(found)
    return tuple(perm)


def _apply_permutation(table: ResultTable, perm: tuple[int, ...]) -> ResultTable:
    return replace(table,
                   columns=tuple(table.columns[i] for i in perm),
                   rows=tuple(tuple(row[i] for i in perm)
                              for row in table.rows))


def _project_columns(cand: ResultTable, ref: ResultTable) -> ResultTable | None:
    """Drop extra candidate columns so the remainder lines up with ref."""
    if len(cand.columns) <= len(ref.columns):
        return None
    cand_names = [c.lower() for c in cand.columns]
    picks: list[int] = []
    used: set[int] = set()
    for rname in (c.lower() for c in ref.columns):
        idx = next((i for i, c in enumerate(cand_names)
                    if c == rname and i not in used), None)
        if idx is None:
            break
        used.add(idx)
        picks.append(idx)
    if len(picks) != len(ref.columns):
        # Name matching failed; try value multisets.
        ref_cols = [_column_values(ref, j) for j in range(len(ref.columns))]
        cand_cols = [_column_values(cand, i) for i in range(len(cand.columns))]
        picks, used = [], set()
        for j in range(len(ref.columns)):
            idx = next((i for i in range(len(cand.columns))
                        if i not in used and cand_cols[i] == ref_cols[j]), None)
            if idx is None:
                return None
            used.add(idx)
            picks.append(idx)
    return _apply_permutation(cand, tuple(picks))


def _round_cell(v, decimals: int):
    if isinstance(v, float):
        return round(v, decimals)
    return v


def _round_table(table: ResultTable, decimals: int) -> ResultTable:
    return replace(table, rows=tuple(
        tuple(_round_cell(v, decimals) for v in row) for row in table.rows))


def _apply(transform: Transform, cand: ResultTable, ref: ResultTable
           ) -> tuple[ResultTable, ResultTable] | None:
    """Apply one transform; None when it is not applicable here."""
    if transform.name == "column_reorder":
        perm = _match_permutation(cand, ref)
        if perm is None or perm == tuple(range(len(perm))):
            return None
        return _apply_permutation(cand, perm), ref
    if transform.name == "column_project":
        projected = _project_columns(cand, ref)
        return (projected, ref) if projected is not None else None
    if transform.name == "row_dedup":
        seen: set = set()
        kept = []
        for row in cand.rows:
            sig = tuple(map(repr, row))
            if sig not in seen:
                seen.add(sig)
                kept.append(row)
        if len(kept) == len(cand.rows):
            return None
        return replace(cand, rows=tuple(kept)), ref
    if transform.name == "ignore_order":
        if not ref.ordered:
            return None
        return cand, replace(ref, ordered=False)
    if transform.name == "round_values":
        assert transform.decimals is not None
        rounded = (_round_table(cand, transform.decimals),
                   _round_table(ref, transform.decimals))
        if rounded == (cand, ref):
            return None
        return rounded
    if transform.name == "limit_truncate":
        if len(cand.rows) <= len(ref.rows):
            return None
        return replace(cand, rows=cand.rows[:len(ref.rows)]), ref
    raise ValueError(f"unknown transform: {transform.name}")


def _try_sequence(seq: tuple[Transform, ...], cand: ResultTable,
                  ref: ResultTable, policy: ComparisonPolicy) -> bool:
    c, r = cand, ref
    for t in seq:
        applied = _apply(t, c, r)
        if applied is None:
            return False
        c, r = applied
    ok, _ = compare_result_tables(c, r, policy)
    return ok


def suggest_repairs(cand: ResultTable, ref: ResultTable,
                    policy: ComparisonPolicy = ComparisonPolicy(),
                    max_depth: int = MAX_DEPTH) -> list[RepairSuggestion]:
    """All shortest transform sequences that make the tables match."""
    ok, _ = compare_result_tables(cand, ref, policy)
    if ok:
        return []
    frontier: list[tuple[Transform, ...]] = [(t,) for t in CATALOG]
    for depth in range(1, max_depth + 1):
        hits = [seq for seq in frontier if _try_sequence(seq, cand, ref, policy)]
        if hits:
            # Soundness double-check: re-apply from scratch before reporting.
            verified = [seq for seq in hits
                        if _try_sequence(seq, cand, ref, policy)]
            return [RepairSuggestion(tuple(t.key for t in seq))
                    for seq in verified]
        frontier = [seq + (t,) for seq in frontier for t in CATALOG
                    if t != seq[-1]]
    return []
