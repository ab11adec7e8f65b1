"""SQL generation: model-backed with a deterministic keyword fallback."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import DataChatError, GenerationFailed, NoTables, NoUsableColumns
from ..providers.core import Providers, complete_structured, prompt
from ..tabular import SemanticType
from .metadata import SchemaSnapshot, TableMeta

_AVG_WORDS = {"average", "mean"}
_COUNT_WORDS = {"count"}


@dataclass
class SqlPlan:
    raw_sql: str
    rationale: str = ""
    referenced_tables: list[str] = field(default_factory=list)
    generator: str = "fallback"  # model | fallback

    def to_dict(self) -> dict:
        return {
            "raw_sql": self.raw_sql,
            "rationale": self.rationale,
            "referenced_tables": list(self.referenced_tables),
            "generator": self.generator,
        }


def question_tokens(question: str) -> list[str]:
    return re.findall(r"[a-z0-9_]+", question.lower())


def generate_sql(question: str, snapshot: SchemaSnapshot,
                 providers: Providers, events: list | None = None) -> SqlPlan:
    """Ask the model for a query; fall back to keyword construction on any
    provider trouble."""
    if not snapshot.tables:
        raise NoTables("schema snapshot has no tables")
    context = f"question: {question}\nschema:\n{snapshot.describe()}"
    request = prompt(
        "sql_generate", context,
        ("sql", "string", True),
        ("rationale", "string", False),
        ("tables", "array", False),
    )
    try:
        value = complete_structured(request, providers.model, clock=providers.clock,
                                    events=events)
        return SqlPlan(
            raw_sql=value["sql"],
            rationale=value.get("rationale", ""),
            referenced_tables=[str(t) for t in value.get("tables", [])],
            generator="model",
        )
    except DataChatError:
        try:
            return fallback_generate_sql(question, snapshot)
        except DataChatError as exc:
            raise GenerationFailed(f"model unavailable and fallback failed: {exc}") from exc


def fallback_generate_sql(question: str, snapshot: SchemaSnapshot) -> SqlPlan:
    """Deterministic keyword-matched aggregate query.

    Table selection scores question tokens against each table's name and
    column names; the measure prefers a mentioned quantitative column and the
    dimension a mentioned temporal, then categorical one. The aggregate is
    AVG/COUNT when asked for, else SUM.
    """
    if not snapshot.tables:
        raise NoTables("schema snapshot has no tables")
    tokens = question_tokens(question)
    token_set = set(tokens)

    candidates = [t for t in snapshot.tables if t.columns_of_type(SemanticType.QUANTITATIVE)]
    if not candidates:
        raise NoUsableColumns("no quantitative column in any table")
    table = max(sorted(candidates, key=lambda t: t.name),
                key=lambda t: _match_score(t, token_set))

    quantitative = table.columns_of_type(SemanticType.QUANTITATIVE)
    measure = next((c for c in quantitative if c.name.lower() in token_set), quantitative[0])

    dimension = None
    for kind in (SemanticType.TEMPORAL, SemanticType.CATEGORICAL):
        dimension = next(
            (c for c in table.columns_of_type(kind) if c.name.lower() in token_set), None)
        if dimension is not None:
            break

    if token_set & _AVG_WORDS:
        agg = "AVG"
    elif token_set & _COUNT_WORDS or "number of" in question.lower():
        agg = "COUNT"
    else:
        agg = "SUM"

    if dimension is not None:
        sql = (f"SELECT {_ident(dimension.name)}, {agg}({_ident(measure.name)}) "
               f"FROM {_ident(table.name)} "
               f"GROUP BY {_ident(dimension.name)} ORDER BY {_ident(dimension.name)}")
    else:
        sql = f"SELECT {_ident(measure.name)} FROM {_ident(table.name)}"
    return SqlPlan(
        raw_sql=sql,
        rationale=f"keyword fallback over table {table.name}",
        referenced_tables=[table.name],
        generator="fallback",
    )


def _match_score(table: TableMeta, tokens: set[str]) -> int:
    score = sum(1 for c in table.columns if c.name.lower() in tokens)
    if table.name.lower() in tokens:
        score += 1
    return score


def _ident(name: str) -> str:
    if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
        return name
    return '"' + name.replace('"', '""') + '"'
