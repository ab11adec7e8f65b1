"""Shared fixtures: seeded sales database, schema snapshots, stub providers."""

from __future__ import annotations

import random
import sqlite3
from pathlib import Path

import pytest

from datachat.config import Settings
from datachat.providers.core import Providers
from datachat.providers.stubs import StubClock, StubModelAdapter, StubSearchAdapter
from datachat.sqlkit.connection import ConnectionConfig
from datachat.sqlkit.metadata import ColumnMeta, SchemaSnapshot, TableMeta, retrieve_metadata
from datachat.state import ConversationState
from datachat.tabular import SemanticType

FIXTURE_SEED = 20240101
FIXTURE_ROWS = 1000
REGIONS = ("east", "north", "south", "west")


def build_sales_db(path: Path, rows: int = FIXTURE_ROWS, seed: int = FIXTURE_SEED) -> Path:
    """Seeded sales fixture: monthly dates, four regions, upward-trending amounts."""
    rng = random.Random(seed)
    conn = sqlite3.connect(path)
    conn.execute("CREATE TABLE sales (month DATE, region TEXT, amount NUMERIC)")
    records = []
    for i in range(rows):
        month_no = i % 12
        month = f"2024-{month_no + 1:02d}-01"
        region = REGIONS[rng.randrange(len(REGIONS))]
        amount = round(100.0 + month_no * 50.0 + rng.gauss(0.0, 20.0), 2)
        records.append((month, region, amount))
    conn.executemany("INSERT INTO sales VALUES (?, ?, ?)", records)
    conn.commit()
    conn.close()
    return path


@pytest.fixture(scope="session")
def sales_db(tmp_path_factory) -> Path:
    return build_sales_db(tmp_path_factory.mktemp("db") / "sales.db")


@pytest.fixture()
def sales_config(sales_db) -> ConnectionConfig:
    return ConnectionConfig(dialect="embedded", location=str(sales_db))


@pytest.fixture()
def sales_snapshot(sales_config) -> SchemaSnapshot:
    return retrieve_metadata(sales_config)


def make_snapshot(*tables: TableMeta) -> SchemaSnapshot:
    return SchemaSnapshot(tables=list(tables), fetched_at="2024-01-01T00:00:00+00:00")


def sales_table_meta(row_count: int = 1000) -> TableMeta:
    return TableMeta(
        name="sales",
        columns=[
            ColumnMeta("month", "DATE", SemanticType.TEMPORAL, ["2024-01-01"]),
            ColumnMeta("region", "TEXT", SemanticType.CATEGORICAL, ["east"]),
            ColumnMeta("amount", "NUMERIC", SemanticType.QUANTITATIVE, ["100.0"]),
        ],
        primary_key=[],
        row_count=row_count,
    )


def stub_providers(model_handlers: dict | None = None,
                   search_fixtures: dict | None = None,
                   script: list | None = None) -> Providers:
    return Providers(
        model=StubModelAdapter(handlers=model_handlers, script=script)
        if (model_handlers is not None or script is not None) else None,
        search=StubSearchAdapter(fixtures=search_fixtures or {}),
        clock=StubClock(),
    )


def question_sql_handler(mapping: dict[str, str]):
    """sql_generate handler keyed on the question line in the prompt context."""
    def handler(context: str):
        first = context.splitlines()[0]
        question = first.partition("question: ")[2]
        if question in mapping:
            return {"sql": mapping[question], "rationale": "fixture", "tables": ["sales"]}
        from datachat.errors import AdapterUnavailable

        raise AdapterUnavailable(f"no sql fixture for question {question!r}")
    return handler


def default_turn_providers(sql_mapping: dict[str, str] | None = None,
                           search_fixtures: dict | None = None) -> Providers:
    """Stub bundle for full turns: intent refinement answers (adds nothing),
    SQL fixtures by question, everything else falls back deterministically."""
    handlers = {"intent_refine": lambda _ctx: {"intents": []}}
    if sql_mapping:
        handlers["sql_generate"] = question_sql_handler(sql_mapping)
    return stub_providers(model_handlers=handlers, search_fixtures=search_fixtures)


@pytest.fixture()
def connected_state(sales_config, sales_snapshot) -> ConversationState:
    state = ConversationState(session_id="s1")
    state.active_connection = sales_config
    state.schema_cache = sales_snapshot
    return state


@pytest.fixture()
def settings() -> Settings:
    return Settings()
