"""Database connections behind a small dialect-adapter seam.

The embedded engine (SQLite via stdlib) is fully supported and is what desk
runs and the test suite certify. Server dialects share the same adapter
interface and differ in identifier quoting and type-name mapping; connecting
to them requires the matching DBAPI driver to be installed.
"""

from __future__ import annotations

import importlib
import sqlite3
from dataclasses import dataclass
from pathlib import Path

from ..errors import ConnectionFailed, WriteAccessRequested

DIALECTS = ("embedded", "mysql", "postgresql", "mariadb", "mssql", "oracle")


@dataclass
class ConnectionConfig:
    dialect: str
    location: str
    read_only: bool = True

    def __post_init__(self):
        if self.dialect not in DIALECTS:
            raise ValueError(f"unknown dialect: {self.dialect}")

    def to_dict(self) -> dict:
        return {"dialect": self.dialect, "location": self.location, "read_only": self.read_only}

    @classmethod
    def from_dict(cls, data: dict) -> "ConnectionConfig":
        return cls(dialect=data["dialect"], location=data["location"],
                   read_only=bool(data.get("read_only", True)))


class DialectAdapter:
    """Quoting, type mapping and connection opening for one SQL dialect."""

    name = "abstract"
    quote_char = '"'
    driver_module: str | None = None
    # declared-type fragments mapped to broad storage families, used when a
    # server dialect reports vendor-specific names
    type_aliases: dict[str, str] = {}

    def quote_ident(self, name: str) -> str:
        q = self.quote_char
        return f"{q}{name.replace(q, q * 2)}{q}"

    def connect(self, location: str):
        if self.driver_module is None:
            raise ConnectionFailed(f"dialect {self.name} has no driver configured")
        try:
            driver = importlib.import_module(self.driver_module)
        except ImportError as exc:
            raise ConnectionFailed(
                f"dialect {self.name} requires the {self.driver_module!r} DBAPI driver"
            ) from exc
        try:
            return driver.connect(location)
        except Exception as exc:
            raise ConnectionFailed(str(exc)) from exc


class EmbeddedAdapter(DialectAdapter):
    name = "embedded"

    def connect(self, location: str):
        path = Path(location)
        if not path.exists():
            raise ConnectionFailed(f"database file not found: {location}")
        try:
            conn = sqlite3.connect(f"file:{path}?mode=ro", uri=True)
            conn.execute("PRAGMA query_only = ON")
        except sqlite3.Error as exc:
            raise ConnectionFailed(str(exc)) from exc
        return conn


class MySqlAdapter(DialectAdapter):
    name = "mysql"
    quote_char = "`"
    driver_module = "pymysql"
    type_aliases = {"TINYINT(1)": "BOOLEAN", "MEDIUMINT": "INTEGER", "LONGTEXT": "TEXT"}


class MariaDbAdapter(MySqlAdapter):
    name = "mariadb"


class PostgresAdapter(DialectAdapter):
    name = "postgresql"
    driver_module = "psycopg2"
    type_aliases = {"SERIAL": "INTEGER", "BIGSERIAL": "INTEGER", "DOUBLE PRECISION": "REAL"}


class MsSqlAdapter(DialectAdapter):
    name = "mssql"
    driver_module = "pyodbc"
    type_aliases = {"BIT": "BOOLEAN", "NVARCHAR": "TEXT", "DATETIME2": "DATETIME", "MONEY": "NUMERIC"}

    def quote_ident(self, name: str) -> str:
        return f"[{name.replace(']', ']]')}]"


class OracleAdapter(DialectAdapter):
    name = "oracle"
    driver_module = "oracledb"
    type_aliases = {"VARCHAR2": "TEXT", "NUMBER": "NUMERIC", "CLOB": "TEXT"}


_ADAPTERS: dict[str, DialectAdapter] = {
    adapter.name: adapter()
    for adapter in (EmbeddedAdapter, MySqlAdapter, MariaDbAdapter,
                    PostgresAdapter, MsSqlAdapter, OracleAdapter)
}


def adapter_for(config: ConnectionConfig) -> DialectAdapter:
    return _ADAPTERS[config.dialect]


def open_connection(config: ConnectionConfig):
    """Open a read-only connection for the configured dialect."""
    if not config.read_only:
        raise WriteAccessRequested("connections must be read-only")
    return adapter_for(config).connect(config.location)
