"""Schema-aware database scaling.

``scale_database`` produces a new sqlite file where every table holds
exactly ``factor`` times the original row count.  Original rows are copied
verbatim; synthetic rows are drawn from per-column empirical samplers:

* **categorical** (≤ 256 distinct non-null values): an exact-quota pool —
  value counts follow the observed frequencies by largest remainder, then
  the pool is shuffled — so scaled frequencies track the original ones
  even for tiny tables;
* **numeric**: equi-depth histogram — pick a bucket, then a uniform value
  inside it (integers rounded);
* **text** (high cardinality): take an observed value and rewrite its
  trailing characters, preserving length.

Primary-key and unique columns receive fresh values instead (max+i for
integers, ``<base>_s<i>`` for text).  Foreign keys are sampled from the
parent's final key pool, so no synthetic row dangles.  NULL rates are
reproduced with exact quotas.  Tables are filled parents-first; an FK
cycle is broken by deferring a nullable FK edge and backfilling it after
every table is populated — a cycle with no nullable edge is an error.

Everything is driven by one seeded RNG, so a (source, factor, seed)
triple always yields the same database.
"""

from __future__ import annotations

import random
import shutil
import sqlite3
import string
from dataclasses import dataclass
from pathlib import Path

from .catalog import ForeignKey, SchemaInfo, TableInfo, introspect_schema

CATEGORICAL_MAX_DISTINCT = 256
_HISTOGRAM_BUCKETS = 16
_RETRY_FACTOR = 64


class ScalingError(Exception):
    pass


class CyclicFkError(ScalingError):
    """FK graph contains a cycle with no nullable edge to defer."""


class CapacityError(ScalingError):
    """A unique constraint left no room for fresh synthetic rows."""


@dataclass(frozen=True)
class DeferredEdge:
    child_table: str
    fk: ForeignKey


def fk_topological_order(schema: SchemaInfo) -> tuple[list[str], list[DeferredEdge]]:
    """Parents-first table order, deferring nullable FK edges on cycles."""
    remaining = set(schema.tables)
    # child -> {parent tables it still waits on}; self-references never block.
    waits: dict[str, set[str]] = {
        t: {fk.parent_table for fk in info.foreign_keys
            if fk.parent_table != t and fk.parent_table in remaining}
        for t, info in schema.tables.items()
    }
    deferred: list[DeferredEdge] = []
    order: list[str] = []
    while remaining:
        ready = sorted(t for t in remaining if not (waits[t] & remaining))
        if ready:
            for t in ready:
                order.append(t)
                remaining.discard(t)
            continue
        # Every remaining table waits on another: find a nullable edge to cut.
        cut = None
        for child in sorted(remaining):
            for fk in schema.tables[child].foreign_keys:
                if fk.parent_table in remaining and fk.parent_table != child \
                        and fk.nullable:
                    cut = DeferredEdge(child_table=child, fk=fk)
                    break
            if cut:
                break
        if cut is None:
            raise CyclicFkError(
                "foreign-key cycle with no nullable edge among: "
                + ", ".join(sorted(remaining)))
        deferred.append(cut)
        waits[cut.child_table].discard(cut.fk.parent_table)
    return order, deferred


def _null_rate(values: list) -> float:
    return sum(v is None for v in values) / len(values) if values else 0.0


def _quota_counts(weights: list[int], m: int) -> list[int]:
    """Split m into integer quotas proportional to weights (largest
    remainder, ties broken by position)."""
    total = sum(weights)
    raw = [w * m / total for w in weights]
    counts = [int(r) for r in raw]
    short = m - sum(counts)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


def _null_quota_positions(rng: random.Random, rate: float, m: int) -> set[int]:
    k = round(rate * m)
    return set(rng.sample(range(m), k)) if k else set()


class _ColumnSampler:
    """Empirical sampler over a column's non-null original values."""

    def __init__(self, values: list, affinity: str):
        self.affinity = affinity
        self.nonnull = [v for v in values if v is not None]
        self.kind = "empty"
        if not self.nonnull:
            return
        distinct = sorted(set(map(repr, self.nonnull)))
        if len(distinct) <= CATEGORICAL_MAX_DISTINCT:
            counts: dict = {}
            for v in self.nonnull:
                counts[v] = counts.get(v, 0) + 1
            self.cat_values = list(counts.keys())
            self.cat_weights = list(counts.values())
            self.kind = "categorical"
        elif affinity in ("integer", "real") and all(
                isinstance(v, (int, float)) for v in self.nonnull):
            ordered = sorted(self.nonnull)
            n_buckets = min(_HISTOGRAM_BUCKETS, len(ordered))
            step = len(ordered) / n_buckets
            self.buckets = [
                (ordered[int(i * step)],
                 ordered[min(int((i + 1) * step), len(ordered)) - 1])
                for i in range(n_buckets)
            ]
            self.kind = "histogram"
        else:
            self.kind = "suffix_text"

    def quota_pool(self, rng: random.Random, m: int) -> list:
        """m categorical values whose counts mirror the observed
        frequencies exactly (up to integer rounding), in random order."""
        counts = _quota_counts(self.cat_weights, m)
        pool = [v for v, k in zip(self.cat_values, counts) for _ in range(k)]
        rng.shuffle(pool)
        return pool

    def draw(self, rng: random.Random):
        if self.kind == "empty":
            return None
        if self.kind == "categorical":
            return rng.choices(self.cat_values, weights=self.cat_weights)[0]
        if self.kind == "histogram":
            lo, hi = self.buckets[rng.randrange(len(self.buckets))]
            x = rng.uniform(float(lo), float(hi))
            return round(x) if self.affinity == "integer" else round(x, 6)
        base = str(rng.choice(self.nonnull))
        k = min(3, len(base))
        tail = "".join(rng.choice(string.ascii_lowercase) for _ in range(k))
        return base[:-k] + tail if k else base


def _fresh_unique(original: list, i: int, affinity: str, rng: random.Random):
    """A value guaranteed to fall outside the original column values."""
    nonnull = [v for v in original if v is not None]
    if affinity == "integer" and all(isinstance(v, int) for v in nonnull):
        base = max(nonnull) if nonnull else 0
        return base + i
    base = str(rng.choice(nonnull)) if nonnull else "v"
    return f"{base}_s{i}"


def _table_ddl(src: sqlite3.Connection) -> list[str]:
    return [row[0] for row in src.execute(
        "SELECT sql FROM sqlite_master WHERE type IN ('table','index') "
        "AND name NOT LIKE 'sqlite_%' AND sql IS NOT NULL ORDER BY rowid")]


def _synthesize_table(rng: random.Random, info: TableInfo, original: list[tuple],
                      m: int, pools: dict[str, dict[str, list]],
                      deferred_cols: set[str]) -> list[tuple]:
    """Build *m* synthetic rows for one table."""
    if m <= 0:
        return []
    col_names = [c.name for c in info.columns]
    col_values = {c.name: [row[i] for row in original]
                  for i, c in enumerate(info.columns)}

    fk_of: dict[str, ForeignKey] = {}
    for fk in info.foreign_keys:
        if len(fk.columns) == 1:
            fk_of[fk.columns[0]] = fk

    single_uniques = {u[0] for u in info.uniques if len(u) == 1}
    if len(info.primary_key) == 1:
        single_uniques.add(info.primary_key[0])
    tuple_keys = [u for u in info.uniques if len(u) > 1]
    if len(info.primary_key) > 1:
        tuple_keys.append(info.primary_key)

    samplers = {c.name: _ColumnSampler(col_values[c.name], c.affinity)
                for c in info.columns}
    null_pos = {
        c.name: _null_quota_positions(rng, _null_rate(col_values[c.name]), m)
        for c in info.columns
        if not c.notnull and c.pk_pos == 0 and c.name not in single_uniques
    }

    # Categorical cells come from fixed per-position pools rather than
    # independent draws, keeping scaled value frequencies exact; positions
    # reserved for NULLs are skipped when sizing each pool.
    cat_pool: dict[str, list] = {}
    cat_rank: dict[str, dict[int, int]] = {}
    for c in info.columns:
        if (samplers[c.name].kind != "categorical" or c.name in fk_of
                or c.name in single_uniques or c.name in deferred_cols):
            continue
        nulls = null_pos.get(c.name, set())
        positions = [p for p in range(m) if p not in nulls]
        cat_rank[c.name] = {p: r for r, p in enumerate(positions)}
        cat_pool[c.name] = samplers[c.name].quota_pool(rng, len(positions))

    seen: set[tuple] = set()
    for key in tuple_keys:
        idx = [col_names.index(k) for k in key]
        for row in original:
            seen.add((tuple(key), tuple(row[i] for i in idx)))

    def make_cell(col_name: str, i: int, row_idx: int):
        col = info.column(col_name)
        if col_name in deferred_cols:
            return None
        if col_name in null_pos and row_idx in null_pos[col_name]:
            return None
        if col_name in fk_of:
            fk = fk_of[col_name]
            parent_col = fk.parent_columns[0]
            if fk.parent_table == info.name:
                # Self-reference: draw from this table's own keys, original
                # plus whatever synthetic rows exist so far.
                j = col_names.index(parent_col)
                pool = [v for v in col_values[parent_col] if v is not None]
                pool += [r[j] for r in rows if r[j] is not None]
            else:
                pool = pools[fk.parent_table][parent_col]
            if not pool:
                return None if not col.notnull else 0
            return rng.choice(pool)
        if col_name in single_uniques:
            return _fresh_unique(col_values[col_name], i, col.affinity, rng)
        if col_name in cat_pool:
            return cat_pool[col_name][cat_rank[col_name][row_idx]]
        return samplers[col_name].draw(rng)

    rows: list[tuple] = []
    attempts = 0
    budget = _RETRY_FACTOR * m
    i = 0
    while len(rows) < m:
        attempts += 1
        if attempts > budget:
            raise CapacityError(
                f"{info.name}: could not find {m} fresh rows under unique "
                f"constraints after {budget} attempts")
        i += 1
        row_idx = len(rows)
        row = tuple(make_cell(c, i, row_idx) for c in col_names)
        collides = False
        for key in tuple_keys:
            idx = [col_names.index(k) for k in key]
            sig = (tuple(key), tuple(row[j] for j in idx))
            if sig in seen:
                collides = True
                break
        if collides:
            continue
        for key in tuple_keys:
            idx = [col_names.index(k) for k in key]
            seen.add((tuple(key), tuple(row[j] for j in idx)))
        rows.append(row)
    return rows


def scale_database(src_path: str | Path, dest_path: str | Path, *,
                   factor: int, seed: int) -> Path:
    """Write a scaled copy of *src_path* at *dest_path* and return it."""
    if factor < 1:
        raise ScalingError(f"factor must be >= 1, got {factor}")
    src_path, dest_path = Path(src_path), Path(dest_path)
    dest_path.parent.mkdir(parents=True, exist_ok=True)
    if dest_path.exists():
        dest_path.unlink()
    if factor == 1:
        shutil.copyfile(src_path, dest_path)
        return dest_path

    schema = introspect_schema(src_path)
    order, deferred = fk_topological_order(schema)
    deferred_by_table: dict[str, set[str]] = {}
    for edge in deferred:
        deferred_by_table.setdefault(edge.child_table, set()).update(
            edge.fk.columns)

    rng = random.Random(f"scale:{seed}:{factor}")
    src = sqlite3.connect(f"file:{src_path}?mode=ro", uri=True)
    dest = sqlite3.connect(dest_path)
    try:
        for stmt in _table_ddl(src):
            dest.execute(stmt)

        pools: dict[str, dict[str, list]] = {}
        originals: dict[str, list[tuple]] = {}
        synth_counts: dict[str, int] = {}
        for t in order:
            info = schema.tables[t]
            col_names = [c.name for c in info.columns]
            original = [tuple(r) for r in src.execute(
                f'SELECT {", ".join(col_names)} FROM "{t}"')]
            originals[t] = original
            m = len(original) * (factor - 1)
            synth = _synthesize_table(
                rng, info, original, m, pools,
                deferred_by_table.get(t, set()))
            synth_counts[t] = len(synth)
            placeholders = ", ".join("?" for _ in col_names)
            dest.executemany(
                f'INSERT INTO "{t}" ({", ".join(col_names)}) '
                f'VALUES ({placeholders})', original + synth)
            pools[t] = {
                c.name: [row[i] for row in original + synth
                         if row[i] is not None]
                for i, c in enumerate(info.columns)
            }

        # Backfill deferred FK columns on synthetic rows only.  Original
        # rows were inserted first, so synthetic rowids start after them.
        for edge in deferred:
            t = edge.child_table
            info = schema.tables[t]
            col_names = [c.name for c in info.columns]
            max_orig_rowid = len(originals[t])
            rowids = [r[0] for r in dest.execute(
                f'SELECT rowid FROM "{t}" WHERE rowid > ? ORDER BY rowid',
                (max_orig_rowid,))]
            for col in edge.fk.columns:
                j = edge.fk.columns.index(col)
                parent_col = edge.fk.parent_columns[j]
                pool = pools[edge.fk.parent_table][parent_col]
                col_idx = col_names.index(col)
                rate = _null_rate([row[col_idx] for row in originals[t]])
                nulls = _null_quota_positions(rng, rate, len(rowids))
                for k, rid in enumerate(rowids):
                    value = None if k in nulls or not pool else rng.choice(pool)
                    dest.execute(
                        f'UPDATE "{t}" SET "{col}" = ? WHERE rowid = ?',
                        (value, rid))
        dest.commit()
    finally:
        src.close()
        dest.close()
    return dest_path


def scaled_db_path(workdir: str | Path, db_id: str, factor: int) -> Path:
    return Path(workdir) / "scaled" / f"{db_id}_x{factor}" / f"{db_id}.sqlite"


def ensure_scaled(src_path: str | Path, workdir: str | Path, db_id: str, *,
                  factor: int, seed: int) -> Path:
    """Return the scaled copy for (db, factor), building it if missing."""
    if factor == 1:
        return Path(src_path)
    dest = scaled_db_path(workdir, db_id, factor)
    if not dest.exists():
        scale_database(src_path, dest, factor=factor, seed=seed)
    return dest
