"""Static validation of generated SQL against a schema snapshot.

Checks run in a fixed order: single statement, SELECT-only statement class,
no mutating/administrative keywords (token- and grammar-level, never by
substring), table and alias-aware column resolution, join predicate audit,
and LIMIT injection for unbounded queries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import (
    MultipleStatements,
    ParseError,
    ReadOnlyViolation,
    UnknownColumn,
    UnknownTable,
)
from . import ast
from .generate import SqlPlan
from .lexer import WORD, split_statements, tokenize
from .metadata import SchemaSnapshot
from .parser import _Parser

CARTESIAN_WARNING = "possible cartesian product"

# Mutating or administrative statement keywords; any appearance as a keyword
# token rejects the statement.
MUTATING_KEYWORDS = frozenset({
    "INSERT", "UPDATE", "DELETE", "DROP", "ALTER", "CREATE", "TRUNCATE",
    "GRANT", "REVOKE", "ATTACH", "PRAGMA", "CALL", "MERGE", "REPLACE",
    "DETACH", "VACUUM", "REINDEX", "ANALYZE", "BEGIN", "COMMIT", "ROLLBACK",
    "SAVEPOINT", "RELEASE", "EXEC", "EXECUTE", "SET", "COPY", "LOAD",
    "RENAME", "UPSERT", "LOCK", "EXPLAIN", "INTO",
})

# Functions with side effects or filesystem access; never allowed.
UNSAFE_FUNCTIONS = frozenset({
    "load_extension", "readfile", "writefile", "edit", "fts3_tokenizer",
})


@dataclass
class ValidatedSql:
    sql: str
    injected_limit: int | None = None
    warnings: list[str] = field(default_factory=list)
    referenced_tables: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "sql": self.sql,
            "injected_limit": self.injected_limit,
            "warnings": list(self.warnings),
            "referenced_tables": list(self.referenced_tables),
        }


def validate_sql(plan: SqlPlan | str, snapshot: SchemaSnapshot,
                 default_limit: int = 10_000) -> ValidatedSql:
    """Validate one statement and return it with a guaranteed LIMIT clause."""
    if default_limit < 1:
        raise ValueError("default_limit must be >= 1")
    raw_sql = plan if isinstance(plan, str) else plan.raw_sql

    tokens = tokenize(raw_sql)
    statements = split_statements(tokens)
    if not statements:
        raise ParseError("empty statement")
    if len(statements) > 1:
        raise MultipleStatements(f"expected one statement, found {len(statements)}")

    stmt_tokens = statements[0]
    first = stmt_tokens[0]
    if not first.is_word("SELECT", "WITH"):
        if first.kind == WORD and first.upper in MUTATING_KEYWORDS:
            raise ReadOnlyViolation(first.upper)
        raise ParseError(f"statement is not a SELECT: {first.text!r}")

    try:
        parser = _Parser(stmt_tokens)
        select = parser.parse_statement()
        parser.expect_end()
    except ParseError as exc:
        offending = exc.details.get("token")
        if isinstance(offending, str) and offending.upper() in MUTATING_KEYWORDS:
            raise ReadOnlyViolation(offending.upper()) from exc
        raise

    for node in ast.walk(select):
        if isinstance(node, ast.FuncCall) and node.name.lower() in UNSAFE_FUNCTIONS:
            raise ReadOnlyViolation(node.name)

    warnings: list[str] = []
    referenced = _Resolver(snapshot, warnings).resolve(select)

    injected = None
    out_sql = raw_sql
    if select.limit is None:
        last = stmt_tokens[-1]
        out_sql = raw_sql[: last.end] + f" LIMIT {default_limit}"
        injected = default_limit

    return ValidatedSql(sql=out_sql, injected_limit=injected, warnings=warnings,
                        referenced_tables=sorted(referenced))


@dataclass
class _Source:
    label: str | None
    columns: list[str] | None  # None when the output shape is not enumerable


class _Resolver:
    """Scope-aware table and column resolution over the parsed tree."""

    def __init__(self, snapshot: SchemaSnapshot, warnings: list[str]):
        self.snapshot = snapshot
        self.warnings = warnings
        self.referenced: set[str] = set()

    def resolve(self, select: ast.Select) -> set[str]:
        self._resolve_select(select, outer=[], cte_env={})
        return self.referenced

    def _resolve_select(self, select: ast.Select, outer: list[list[_Source]],
                        cte_env: dict[str, list[str] | None]) -> list[str] | None:
        env = dict(cte_env)
        for cte in select.ctes:
            # register before resolving the body so recursive CTEs see themselves
            env[cte.name.lower()] = cte.columns or None
            body_cols = self._resolve_select(cte.select, outer, env)
            env[cte.name.lower()] = cte.columns or body_cols

        sources: list[_Source] = []
        scope = outer + [sources]
        for chain in select.from_clause:
            sources.append(self._resolve_source(chain.first, outer, env))
            for join in chain.joins:
                sources.append(self._resolve_source(join.source, outer, env))
                if join.on is not None:
                    self._resolve_expr(join.on, scope, [], env)
                elif not join.using and not join.join_type.startswith("natural"):
                    if CARTESIAN_WARNING not in self.warnings:
                        self.warnings.append(CARTESIAN_WARNING)

        output_names: list[str] = []
        for item in select.items:
            if isinstance(item.expr, ast.Star):
                continue
            if item.alias:
                output_names.append(item.alias.lower())
            elif isinstance(item.expr, ast.ColumnRef):
                output_names.append(item.expr.name.lower())

        for item in select.items:
            self._resolve_expr(item.expr, scope, [], env)
        if select.where is not None:
            self._resolve_expr(select.where, scope, [], env)
        for expr in select.group_by:
            self._resolve_expr(expr, scope, output_names, env)
        if select.having is not None:
            self._resolve_expr(select.having, scope, output_names, env)
        for term in select.order_by:
            self._resolve_expr(term.expr, scope, output_names, env)
        for expr in (select.limit, select.offset):
            if expr is not None:
                self._resolve_expr(expr, scope, [], env)

        return self._output_columns(select)

    def _output_columns(self, select: ast.Select) -> list[str] | None:
        columns: list[str] = []
        for item in select.items:
            if isinstance(item.expr, ast.Star):
                return None
            if item.alias:
                columns.append(item.alias)
            elif isinstance(item.expr, ast.ColumnRef):
                columns.append(item.expr.name)
            else:
                return None
        return columns

    def _resolve_source(self, source: ast.TableSource, outer: list[list[_Source]],
                        env: dict[str, list[str] | None]) -> _Source:
        if source.subquery is not None:
            columns = self._resolve_select(source.subquery, outer, env)
            return _Source(label=(source.alias or "").lower() or None, columns=columns)
        name = source.name or ""
        label = (source.alias or name).lower()
        if name.lower() in env:
            return _Source(label=label, columns=env[name.lower()])
        table = self.snapshot.table(name)
        if table is None:
            raise UnknownTable(name)
        self.referenced.add(table.name)
        return _Source(label=label, columns=[c.name for c in table.columns])

    def _resolve_expr(self, expr: ast.Node, scope: list[list[_Source]],
                      output_names: list[str], env: dict[str, list[str] | None]) -> None:
        if isinstance(expr, ast.ColumnRef):
            self._check_column(expr, scope, output_names)
            return
        if isinstance(expr, ast.Star):
            if expr.table is not None:
                self._check_qualifier(expr.table, scope)
            return
        if isinstance(expr, (ast.ScalarSubquery, ast.Exists)):
            self._resolve_select(expr.select, scope, env)
            return
        if isinstance(expr, ast.InSubquery):
            self._resolve_expr(expr.expr, scope, output_names, env)
            self._resolve_select(expr.select, scope, env)
            return
        for child in expr.children():
            self._resolve_expr(child, scope, output_names, env)

    def _check_qualifier(self, qualifier: str, scope: list[list[_Source]]) -> _Source | None:
        wanted = qualifier.lower()
        for sources in reversed(scope):
            for source in sources:
                if source.label == wanted:
                    return source
        raise UnknownTable(qualifier)

    def _check_column(self, ref: ast.ColumnRef, scope: list[list[_Source]],
                      output_names: list[str]) -> None:
        if ref.table is not None:
            source = self._check_qualifier(ref.table, scope)
            if source is not None and source.columns is not None:
                if ref.name.lower() not in (c.lower() for c in source.columns):
                    raise UnknownColumn(f"{ref.table}.{ref.name}")
            return
        wanted = ref.name.lower()
        if wanted in output_names:
            return
        all_known = True
        for sources in reversed(scope):
            for source in sources:
                if source.columns is None:
                    all_known = False
                elif wanted in (c.lower() for c in source.columns):
                    return
        if all_known:
            raise UnknownColumn(ref.name)
