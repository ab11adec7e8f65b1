from .connection import DIALECTS, ConnectionConfig, DialectAdapter, adapter_for, open_connection
from .execute import execute_sql
from .generate import SqlPlan, fallback_generate_sql, generate_sql, question_tokens
from .metadata import ColumnMeta, SchemaSnapshot, TableMeta, retrieve_metadata
from .validate import MUTATING_KEYWORDS, ValidatedSql, validate_sql

__all__ = [
    "DIALECTS", "ConnectionConfig", "DialectAdapter", "adapter_for", "open_connection",
    "execute_sql", "SqlPlan", "fallback_generate_sql", "generate_sql", "question_tokens",
    "ColumnMeta", "SchemaSnapshot", "TableMeta", "retrieve_metadata",
    "MUTATING_KEYWORDS", "ValidatedSql", "validate_sql",
]
