"""Database catalog and schema introspection.

The catalog is a small JSON file mapping database ids to engine + file
path (paths are relative to the catalog's directory).  Only the sqlite
engine is implemented; the engine field exists so a second driver can
slot in without touching callers.
"""

from __future__ import annotations

import json
import sqlite3
from dataclasses import dataclass, field
from pathlib import Path


class CatalogError(Exception):
    pass


@dataclass(frozen=True)
class DatabaseRef:
    db_id: str
    engine: str
    path: Path


@dataclass
class Catalog:
    root: Path
    databases: dict[str, DatabaseRef] = field(default_factory=dict)

    @classmethod
    def load(cls, catalog_path: str | Path) -> "Catalog":
        p = Path(catalog_path)
        try:
            raw = json.loads(p.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise CatalogError(f"catalog file not found: {p}")
        except json.JSONDecodeError as exc:
            raise CatalogError(f"catalog is not valid JSON: {exc}")
        dbs = {}
        for db_id, entry in raw.get("databases", {}).items():
            engine = entry.get("engine", "sqlite")
            if engine != "sqlite":
                raise CatalogError(
                    f"{db_id}: engine {engine!r} is not supported by this build")
            dbs[db_id] = DatabaseRef(db_id=db_id, engine=engine,
                                     path=(p.parent / entry["path"]).resolve())
        return cls(root=p.parent.resolve(), databases=dbs)

    def get(self, db_id: str) -> DatabaseRef:
        try:
            return self.databases[db_id]
        except KeyError:
            raise CatalogError(f"unknown database id: {db_id}")

    def db_ids(self) -> list[str]:
        return sorted(self.databases)

    def to_json(self) -> dict:
        return {
            "version": 1,
            "databases": {
                db_id: {"engine": ref.engine,
                        "path": str(ref.path.relative_to(self.root))
                        if ref.path.is_relative_to(self.root) else str(ref.path)}
                for db_id, ref in sorted(self.databases.items())
            },
        }


@dataclass(frozen=True)
class ColumnInfo:
    name: str
    decl_type: str
    notnull: bool
    pk_pos: int  # 1-based position inside the primary key, 0 if not a member

    @property
    def affinity(self) -> str:
        t = self.decl_type.upper()
        if "INT" in t:
            return "integer"
        if any(k in t for k in ("REAL", "FLOA", "DOUB")):
            return "real"
        return "text"


@dataclass(frozen=True)
class ForeignKey:
    columns: tuple[str, ...]
    parent_table: str
    parent_columns: tuple[str, ...]
    nullable: bool  # true when every referencing column is nullable


@dataclass(frozen=True)
class TableInfo:
    name: str
    columns: tuple[ColumnInfo, ...]
    primary_key: tuple[str, ...]
    uniques: tuple[tuple[str, ...], ...]
    foreign_keys: tuple[ForeignKey, ...]

    def column(self, name: str) -> ColumnInfo:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass(frozen=True)
class SchemaInfo:
    tables: dict[str, TableInfo]

    def column_map(self) -> dict[str, list[str]]:
        """table -> column names, the shape the normalizer consumes."""
        return {t: [c.name for c in info.columns]
                for t, info in self.tables.items()}


def introspect_schema(db_path: str | Path) -> SchemaInfo:
    conn = sqlite3.connect(f"file:{Path(db_path)}?mode=ro", uri=True)
    try:
        names = [r[0] for r in conn.execute(
            "SELECT name FROM sqlite_master WHERE type='table' "
            "AND name NOT LIKE 'sqlite_%' ORDER BY name")]
        tables = {}
        for t in names:
            cols = []
            pk_members: list[tuple[int, str]] = []
            for cid, name, decl, notnull, _dflt, pk in conn.execute(
                    f'PRAGMA table_info("{t}")'):
                cols.append(ColumnInfo(name=name, decl_type=decl or "",
                                       notnull=bool(notnull), pk_pos=pk))
                if pk:
                    pk_members.append((pk, name))
            pk = tuple(n for _, n in sorted(pk_members))
            nullable_of = {c.name: not c.notnull and c.pk_pos == 0 for c in cols}

            fk_groups: dict[int, list[tuple[int, str, str, str]]] = {}
            for (fk_id, seq, parent, frm, to, *_rest) in conn.execute(
                    f'PRAGMA foreign_key_list("{t}")'):
                fk_groups.setdefault(fk_id, []).append((seq, frm, parent, to))
            fks = []
            for fk_id in sorted(fk_groups):
                parts = sorted(fk_groups[fk_id])
                parent = parts[0][2]
                child_cols = tuple(p[1] for p in parts)
                parent_cols = tuple(p[3] for p in parts)
                fks.append(ForeignKey(
                    columns=child_cols, parent_table=parent,
                    parent_columns=parent_cols,
                    nullable=all(nullable_of.get(c, False) for c in child_cols)))

            uniques = []
            for (_seq, idx_name, is_unique, origin, _partial) in conn.execute(
                    f'PRAGMA index_list("{t}")'):
                if not is_unique or origin == "pk":
                    continue
                members = tuple(r[2] for r in conn.execute(
                    f'PRAGMA index_info("{idx_name}")'))
                if all(m is not None for m in members):
                    uniques.append(members)

            tables[t] = TableInfo(name=t, columns=tuple(cols), primary_key=pk,
                                  uniques=tuple(uniques),
                                  foreign_keys=tuple(fks))
        return SchemaInfo(tables=tables)
    finally:
        conn.close()
