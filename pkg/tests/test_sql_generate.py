"""SQL generation: stub-model path and the deterministic fallback."""

import pytest

from datachat.errors import NoTables, NoUsableColumns
from datachat.providers.core import Providers
from datachat.providers.stubs import StubClock, StubModelAdapter
from datachat.sqlkit.generate import fallback_generate_sql, generate_sql
from datachat.sqlkit.metadata import ColumnMeta, SchemaSnapshot, TableMeta
from datachat.sqlkit.validate import validate_sql
from datachat.tabular import SemanticType

from conftest import make_snapshot, sales_table_meta

SNAP = make_snapshot(sales_table_meta())


def test_fallback_bar_chart_question_query():
    plan = fallback_generate_sql("Show me a bar chart of sales by month", SNAP)
    assert plan.raw_sql == ("SELECT month, SUM(amount) FROM sales "
                            "GROUP BY month ORDER BY month")
    assert plan.generator == "fallback"
    assert plan.referenced_tables == ["sales"]


def test_fallback_average_by_region():
    plan = fallback_generate_sql("average amount by region", SNAP)
    assert plan.raw_sql == ("SELECT region, AVG(amount) FROM sales "
                            "GROUP BY region ORDER BY region")


def test_fallback_count_phrase():
    plan = fallback_generate_sql("number of sales by region", SNAP)
    assert "COUNT(amount)" in plan.raw_sql


def test_fallback_no_dimension_mentioned():
    plan = fallback_generate_sql("total amount", SNAP)
    assert plan.raw_sql == "SELECT amount FROM sales"


def test_fallback_text_only_schema_fails():
    snap = make_snapshot(TableMeta(
        name="notes",
        columns=[ColumnMeta("body", "TEXT", SemanticType.UNKNOWN)],
        row_count=10,
    ))
    with pytest.raises(NoUsableColumns):
        fallback_generate_sql("anything", snap)


def test_fallback_table_choice_by_token_matches():
    snap = make_snapshot(
        TableMeta(name="inventory",
                  columns=[ColumnMeta("sku", "TEXT", SemanticType.CATEGORICAL),
                           ColumnMeta("stock", "INT", SemanticType.QUANTITATIVE)],
                  row_count=5),
        TableMeta(name="sales",
                  columns=[ColumnMeta("month", "DATE", SemanticType.TEMPORAL),
                           ColumnMeta("amount", "NUMERIC", SemanticType.QUANTITATIVE)],
                  row_count=5),
    )
    plan = fallback_generate_sql("how is stock in inventory", snap)
    assert plan.referenced_tables == ["inventory"]
    # tie: no tokens match either table -> first by name order
    plan = fallback_generate_sql("zzz", snap)
    assert plan.referenced_tables == ["inventory"]


def test_fallback_output_always_validates(sales_snapshot):
    questions = [
        "Show me a bar chart of sales by month",
        "average amount by region",
        "total amount please",
        "number of amount by month",
        "anything at all",
    ]
    for question in questions:
        plan = fallback_generate_sql(question, sales_snapshot)
        validated = validate_sql(plan, sales_snapshot)
        assert validated.sql.endswith("LIMIT 10000")


def test_generate_uses_model_fixture():
    adapter = StubModelAdapter(handlers={
        "sql_generate": lambda ctx: {"sql": "SELECT month, amount FROM sales",
                                     "rationale": "direct", "tables": ["sales"]},
    })
    plan = generate_sql("Show me sales", SNAP, Providers(model=adapter, clock=StubClock()))
    assert plan.generator == "model"
    assert plan.raw_sql == "SELECT month, amount FROM sales"


def test_generate_falls_back_without_model():
    plan = generate_sql("Show me a bar chart of sales by month", SNAP,
                        Providers(model=None, clock=StubClock()))
    assert plan.generator == "fallback"
    assert "GROUP BY month" in plan.raw_sql


def test_generate_falls_back_on_schema_violation():
    adapter = StubModelAdapter(script=[{"nope": 1}, {"nope": 2}, {"nope": 3}])
    plan = generate_sql("show amount", SNAP, Providers(model=adapter, clock=StubClock()))
    assert plan.generator == "fallback"


def test_generate_empty_snapshot_no_tables():
    empty = SchemaSnapshot(tables=[], fetched_at="t")
    with pytest.raises(NoTables):
        generate_sql("anything", empty, Providers(clock=StubClock()))
    with pytest.raises(NoTables):
        fallback_generate_sql("anything", empty)
