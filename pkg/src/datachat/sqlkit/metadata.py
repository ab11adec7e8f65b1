"""Schema introspection: tables, columns, keys, semantic types, samples."""

from __future__ import annotations

import sqlite3
from dataclasses import dataclass, field
from datetime import datetime, timezone

from ..errors import ConnectionFailed
from ..tabular import SemanticType, infer_semantic_type, utc_now_iso
from .connection import ConnectionConfig, open_connection

SAMPLE_LIMIT = 5

_NUMERIC_FRAGMENTS = ("INT", "REAL", "FLOA", "DOUB", "DEC", "NUM", "MONEY", "SERIAL")
_TEXT_FRAGMENTS = ("CHAR", "CLOB", "TEXT", "STR", "ENUM", "UUID")


@dataclass
class ColumnMeta:
    name: str
    declared_type: str
    semantic_type: SemanticType
    sample_values: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "declared_type": self.declared_type,
            "semantic_type": self.semantic_type.value,
            "sample_values": list(self.sample_values),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ColumnMeta":
        return cls(data["name"], data["declared_type"],
                   SemanticType(data["semantic_type"]), list(data["sample_values"]))


@dataclass
class TableMeta:
    name: str
    columns: list[ColumnMeta]
    primary_key: list[str] = field(default_factory=list)
    foreign_keys: list[tuple[str, str, str]] = field(default_factory=list)
    row_count: int = 0

    def column(self, name: str) -> ColumnMeta | None:
        lowered = name.lower()
        for col in self.columns:
            if col.name.lower() == lowered:
                return col
        return None

    def columns_of_type(self, kind: SemanticType) -> list[ColumnMeta]:
        return [c for c in self.columns if c.semantic_type == kind]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "columns": [c.to_dict() for c in self.columns],
            "primary_key": list(self.primary_key),
            "foreign_keys": [list(fk) for fk in self.foreign_keys],
            "row_count": self.row_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TableMeta":
        return cls(
            name=data["name"],
            columns=[ColumnMeta.from_dict(c) for c in data["columns"]],
            primary_key=list(data.get("primary_key", [])),
            foreign_keys=[tuple(fk) for fk in data.get("foreign_keys", [])],
            row_count=int(data.get("row_count", 0)),
        )


@dataclass
class SchemaSnapshot:
    tables: list[TableMeta]
    fetched_at: str

    def table(self, name: str) -> TableMeta | None:
        lowered = name.lower()
        for table in self.tables:
            if table.name.lower() == lowered:
                return table
        return None

    @property
    def table_names(self) -> list[str]:
        return [t.name for t in self.tables]

    def to_dict(self) -> dict:
        return {"tables": [t.to_dict() for t in self.tables], "fetched_at": self.fetched_at}

    @classmethod
    def from_dict(cls, data: dict) -> "SchemaSnapshot":
        return cls(tables=[TableMeta.from_dict(t) for t in data["tables"]],
                   fetched_at=data["fetched_at"])

    def describe(self) -> str:
        """Compact text form used in model prompt contexts."""
        lines = []
        for table in self.tables:
            cols = ", ".join(
                f"{c.name} {c.declared_type or '?'} [{c.semantic_type.value}]"
                for c in table.columns
            )
            lines.append(f"table {table.name} ({table.row_count} rows): {cols}")
        return "\n".join(lines)


def semantic_type_from_declared(declared: str, distinct_count: int, row_count: int,
                                samples: list) -> SemanticType:
    """Map a declared column type to its analytical role.

    Numeric types are quantitative, date/time temporal, bool boolean; text is
    categorical when the distinct count stays within max(20, 5% of rows), else
    unknown. Typeless columns fall back to value-based inference.
    """
    upper = declared.upper()
    if "BOOL" in upper:
        return SemanticType.BOOLEAN
    if "DATE" in upper or "TIME" in upper:
        return SemanticType.TEMPORAL
    if any(frag in upper for frag in _NUMERIC_FRAGMENTS):
        return SemanticType.QUANTITATIVE
    if any(frag in upper for frag in _TEXT_FRAGMENTS):
        if distinct_count <= max(20, 0.05 * row_count):
            return SemanticType.CATEGORICAL
        return SemanticType.UNKNOWN
    if not upper:
        return infer_semantic_type(samples, row_count)
    return SemanticType.UNKNOWN


def retrieve_metadata(config: ConnectionConfig, now: datetime | None = None) -> SchemaSnapshot:
    """Introspect all user tables on the configured connection."""
    conn = open_connection(config)
    try:
        tables = [_introspect_table(conn, name) for name in _list_tables(conn)]
    finally:
        conn.close()
    fetched = utc_now_iso(now if now is not None else datetime.now(timezone.utc))
    return SchemaSnapshot(tables=tables, fetched_at=fetched)


def _list_tables(conn) -> list[str]:
    try:
        rows = conn.execute(
            "SELECT name FROM sqlite_master WHERE type = 'table' "
            "AND name NOT LIKE 'sqlite_%' ORDER BY name"
        ).fetchall()
    except sqlite3.Error as exc:
        raise ConnectionFailed(str(exc)) from exc
    return [row[0] for row in rows]


def _introspect_table(conn, name: str) -> TableMeta:
    quoted = '"' + name.replace('"', '""') + '"'
    info = conn.execute(f"PRAGMA table_info({quoted})").fetchall()
    primary_key = [row[1] for row in sorted((r for r in info if r[5]), key=lambda r: r[5])]
    row_count = conn.execute(f"SELECT COUNT(*) FROM {quoted}").fetchone()[0]
    order = ", ".join('"' + c.replace('"', '""') + '"' for c in primary_key) or "rowid"
    try:
        sample_rows = conn.execute(
            f"SELECT * FROM {quoted} ORDER BY {order} LIMIT {SAMPLE_LIMIT}"
        ).fetchall()
    except sqlite3.Error:
        sample_rows = conn.execute(f"SELECT * FROM {quoted} LIMIT {SAMPLE_LIMIT}").fetchall()

    columns = []
    for idx, (_, col_name, declared, _, _, _) in enumerate(info):
        samples = [row[idx] for row in sample_rows if row[idx] is not None]
        distinct = conn.execute(
            f'SELECT COUNT(DISTINCT "{col_name}") FROM {quoted}'
        ).fetchone()[0]
        semantic = semantic_type_from_declared(declared or "", distinct, row_count, samples)
        columns.append(ColumnMeta(
            name=col_name,
            declared_type=declared or "",
            semantic_type=semantic,
            sample_values=[str(v) for v in samples[:SAMPLE_LIMIT]],
        ))

    foreign_keys = [
        (row[3], row[2], row[4])
        for row in conn.execute(f"PRAGMA foreign_key_list({quoted})").fetchall()
    ]
    return TableMeta(name=name, columns=columns, primary_key=primary_key,
                     foreign_keys=foreign_keys, row_count=row_count)
