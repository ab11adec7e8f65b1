"""Tabular values: semantic column types and the shared result-table type.

A ``ResultTable`` is the common currency between the SQL, visualization and
analysis agents: plain JSON-native values, column names paired with semantic
types, row-major storage.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from enum import Enum
from typing import Any, Iterable, Optional, Sequence


class SemanticType(str, Enum):
    QUANTITATIVE = "quantitative"
    CATEGORICAL = "categorical"
    TEMPORAL = "temporal"
    BOOLEAN = "boolean"
    UNKNOWN = "unknown"


def parse_temporal(value: Any) -> Optional[datetime]:
    """Parse an ISO-8601 date/datetime string; None when it is not one."""
    if isinstance(value, datetime):
        return value
    if isinstance(value, date):
        return datetime(value.year, value.month, value.day)
    if not isinstance(value, str):
        return None
    text = value.strip()
    if len(text) < 8 or not text[:4].isdigit():
        return None
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        return None


def infer_semantic_type(values: Sequence[Any], row_count: Optional[int] = None) -> SemanticType:
    """Classify a column from its values.

    Mirrors the declared-type rules used during schema introspection: numbers
    are quantitative, bools boolean, ISO date strings temporal (>= 95% of the
    non-null values must parse), and low-cardinality text is categorical
    (distinct count <= max(20, 5% of rows)).
    """
    present = [v for v in values if v is not None]
    if not present:
        return SemanticType.UNKNOWN
    if all(isinstance(v, bool) for v in present):
        return SemanticType.BOOLEAN
    if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in present):
        return SemanticType.QUANTITATIVE
    parsed = sum(1 for v in present if parse_temporal(v) is not None)
    if parsed / len(present) >= 0.95:
        return SemanticType.TEMPORAL
    total = row_count if row_count is not None else len(values)
    distinct = len({str(v) for v in present})
    if distinct <= max(20, 0.05 * total):
        return SemanticType.CATEGORICAL
    return SemanticType.UNKNOWN


def utc_now_iso(now: datetime) -> str:
    if now.tzinfo is None:
        now = now.replace(tzinfo=timezone.utc)
    return now.astimezone(timezone.utc).isoformat()


@dataclass
class ResultTable:
    columns: list[tuple[str, SemanticType]]
    rows: list[tuple]
    truncated: bool = False
    source_sql: str = ""

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("row arity does not match column count")

    @property
    def column_names(self) -> list[str]:
        return [name for name, _ in self.columns]

    def column_values(self, name: str) -> list:
        idx = self.column_names.index(name)
        return [row[idx] for row in self.rows]

    def column_type(self, name: str) -> SemanticType:
        for col, kind in self.columns:
            if col == name:
                return kind
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "columns": [[name, kind.value] for name, kind in self.columns],
            "rows": [list(row) for row in self.rows],
            "truncated": self.truncated,
            "source_sql": self.source_sql,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ResultTable":
        return cls(
            columns=[(name, SemanticType(kind)) for name, kind in data["columns"]],
            rows=[tuple(row) for row in data["rows"]],
            truncated=bool(data.get("truncated", False)),
            source_sql=data.get("source_sql", ""),
        )


def column_major(table: ResultTable, fields: Iterable[str] | None = None) -> dict:
    """Column-major block for chart specs: field order plus per-field values."""
    names = list(fields) if fields is not None else table.column_names
    return {"fields": names, "values": {name: table.column_values(name) for name in names}}
