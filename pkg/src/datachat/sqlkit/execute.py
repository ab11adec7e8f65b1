"""Read-only execution of validated statements."""

from __future__ import annotations

import sqlite3

from ..errors import ExecutionFailed, ExecutionTimeout
from ..providers.core import Clock, SystemClock
from ..tabular import ResultTable, infer_semantic_type
from .connection import ConnectionConfig, open_connection
from .validate import ValidatedSql

_PROGRESS_EVERY_OPS = 5_000


def execute_sql(validated: ValidatedSql, config: ConnectionConfig,
                row_cap: int = 10_000, deadline_ms: int = 30_000,
                clock: Clock | None = None) -> ResultTable:
    """Run a validated statement; rows capped, wall-clock deadline enforced."""
    clock = clock or SystemClock()
    conn = open_connection(config)
    timed_out = {"flag": False}
    started = clock.monotonic()

    def _check_deadline() -> int:
        if (clock.monotonic() - started) * 1000.0 > deadline_ms:
            timed_out["flag"] = True
            return 1
        return 0

    try:
        conn.set_progress_handler(_check_deadline, _PROGRESS_EVERY_OPS)
        try:
            cursor = conn.execute(validated.sql)
            raw_rows = cursor.fetchmany(row_cap + 1)
        except sqlite3.Error as exc:
            if timed_out["flag"]:
                raise ExecutionTimeout(f"statement exceeded {deadline_ms} ms") from exc
            raise ExecutionFailed(str(exc)) from exc
        names = [d[0] for d in cursor.description] if cursor.description else []
    finally:
        conn.close()

    truncated = len(raw_rows) > row_cap
    rows = [tuple(_plain(v) for v in row) for row in raw_rows[:row_cap]]
    if validated.injected_limit is not None and len(rows) >= validated.injected_limit:
        truncated = True

    columns = []
    for idx, name in enumerate(names):
        values = [row[idx] for row in rows]
        columns.append((name, infer_semantic_type(values)))
    return ResultTable(columns=columns, rows=rows, truncated=truncated,
                       source_sql=validated.sql)


def _plain(value):
    if isinstance(value, bytes):
        return value.decode("utf-8", "replace")
    return value
