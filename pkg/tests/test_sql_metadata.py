"""Schema introspection against fixture databases."""

import sqlite3

import pytest

from datachat.errors import ConnectionFailed, WriteAccessRequested
from datachat.sqlkit.connection import ConnectionConfig, adapter_for, open_connection
from datachat.sqlkit.metadata import retrieve_metadata
from datachat.tabular import SemanticType


def test_sales_fixture_semantic_types(sales_config):
    snapshot = retrieve_metadata(sales_config)
    assert snapshot.table_names == ["sales"]
    table = snapshot.tables[0]
    kinds = {c.name: c.semantic_type for c in table.columns}
    assert kinds == {
        "month": SemanticType.TEMPORAL,
        "region": SemanticType.CATEGORICAL,
        "amount": SemanticType.QUANTITATIVE,
    }
    assert table.row_count == 1000
    for column in table.columns:
        assert len(column.sample_values) <= 5


def test_empty_database_snapshot(tmp_path):
    path = tmp_path / "empty.db"
    sqlite3.connect(path).close()
    snapshot = retrieve_metadata(ConnectionConfig(dialect="embedded", location=str(path)))
    assert snapshot.tables == []


def test_unreachable_dsn_fails(tmp_path):
    config = ConnectionConfig(dialect="embedded", location=str(tmp_path / "missing.db"))
    with pytest.raises(ConnectionFailed):
        retrieve_metadata(config)


def test_high_cardinality_text_is_unknown(tmp_path):
    path = tmp_path / "wide.db"
    conn = sqlite3.connect(path)
    conn.execute("CREATE TABLE notes (body TEXT, label TEXT)")
    conn.executemany("INSERT INTO notes VALUES (?, ?)",
                     [(f"unique body {i}", "tag") for i in range(300)])
    conn.commit()
    conn.close()
    snapshot = retrieve_metadata(ConnectionConfig(dialect="embedded", location=str(path)))
    kinds = {c.name: c.semantic_type for c in snapshot.tables[0].columns}
    assert kinds["body"] == SemanticType.UNKNOWN  # 300 distinct > max(20, 5%)
    assert kinds["label"] == SemanticType.CATEGORICAL


def test_foreign_keys_and_primary_key(tmp_path):
    path = tmp_path / "fk.db"
    conn = sqlite3.connect(path)
    conn.executescript("""
        CREATE TABLE regions (id INTEGER PRIMARY KEY, name TEXT);
        CREATE TABLE orders (id INTEGER PRIMARY KEY, region_id INTEGER,
                             amount REAL, REFERENCES_ignored TEXT,
                             FOREIGN KEY (region_id) REFERENCES regions(id));
        INSERT INTO regions VALUES (1, 'north');
        INSERT INTO orders VALUES (1, 1, 10.5, 'x');
    """)
    conn.commit()
    conn.close()
    snapshot = retrieve_metadata(ConnectionConfig(dialect="embedded", location=str(path)))
    orders = snapshot.table("orders")
    assert orders.primary_key == ["id"]
    assert ("region_id", "regions", "id") in orders.foreign_keys


def test_snapshot_stable_modulo_fetched_at(sales_config):
    a = retrieve_metadata(sales_config)
    b = retrieve_metadata(sales_config)
    da, db = a.to_dict(), b.to_dict()
    da.pop("fetched_at"), db.pop("fetched_at")
    assert da == db


def test_snapshot_round_trip(sales_snapshot):
    from datachat.sqlkit.metadata import SchemaSnapshot

    assert SchemaSnapshot.from_dict(sales_snapshot.to_dict()).to_dict() == sales_snapshot.to_dict()


def test_read_only_enforced_at_connection(sales_config):
    conn = open_connection(sales_config)
    with pytest.raises(sqlite3.OperationalError):
        conn.execute("INSERT INTO sales VALUES ('2024-01-01', 'x', 1)")
    conn.close()


def test_write_access_requested_rejected(sales_db):
    config = ConnectionConfig(dialect="embedded", location=str(sales_db), read_only=False)
    with pytest.raises(WriteAccessRequested):
        open_connection(config)


def test_server_dialect_seam_quoting():
    mysql = adapter_for(ConnectionConfig(dialect="mysql", location="dsn"))
    assert mysql.quote_ident("weird`name") == "`weird``name`"
    mssql = adapter_for(ConnectionConfig(dialect="mssql", location="dsn"))
    assert mssql.quote_ident("a]b") == "[a]]b]"


def test_unknown_dialect_rejected():
    with pytest.raises(ValueError):
        ConnectionConfig(dialect="mongodb", location="nope")
