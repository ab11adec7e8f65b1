"""Structured model completion and web search contracts.

Two external intelligence dependencies sit behind adapter protocols so
everything downstream runs offline against deterministic stubs: a model
adapter answering structured prompts, and a search adapter returning snippet
results. Model output is validated against the prompt's output schema and
repaired by re-prompting with the violation appended.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Any, Callable, Optional, Protocol
from urllib.parse import urlparse

from ..errors import AdapterUnavailable, SchemaViolation, Timeout

TASK_TAGS = frozenset({
    "intent_refine", "sql_generate", "insight_narrate",
    "explain_synthesize", "customize_parse",
})

FIELD_KINDS = frozenset({"string", "number", "boolean", "array", "object"})

MAX_SNIPPET_LEN = 1000


@dataclass(frozen=True)
class SchemaField:
    name: str
    kind: str
    required: bool = True

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"unknown field kind: {self.kind}")


@dataclass(frozen=True)
class StructuredPrompt:
    task_tag: str
    context: str
    output_schema: tuple[SchemaField, ...]

    def __post_init__(self):
        if self.task_tag not in TASK_TAGS:
            raise ValueError(f"unknown task tag: {self.task_tag}")
        if not self.output_schema:
            raise ValueError("output schema must be non-empty")

    def to_dict(self) -> dict:
        return {
            "task_tag": self.task_tag,
            "context": self.context,
            "output_schema": [
                {"name": f.name, "kind": f.kind, "required": f.required}
                for f in self.output_schema
            ],
        }


def prompt(task_tag: str, context: str, *fields: tuple) -> StructuredPrompt:
    return StructuredPrompt(
        task_tag=task_tag,
        context=context,
        output_schema=tuple(SchemaField(*f) for f in fields),
    )


@dataclass
class SearchResultItem:
    query: str
    title: str
    url: str
    snippet: str

    def __post_init__(self):
        parsed = urlparse(self.url)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise ValueError(f"invalid url: {self.url!r}")
        if len(self.snippet) > MAX_SNIPPET_LEN:
            self.snippet = self.snippet[:MAX_SNIPPET_LEN]

    def to_dict(self) -> dict:
        return {"query": self.query, "title": self.title, "url": self.url,
                "snippet": self.snippet}


class Clock(Protocol):
    def monotonic(self) -> float: ...
    def utcnow(self) -> datetime: ...


class SystemClock:
    def monotonic(self) -> float:
        return time.monotonic()

    def utcnow(self) -> datetime:
        return datetime.now(timezone.utc)


class ModelAdapter(Protocol):
    def complete(self, prompt: StructuredPrompt) -> Any: ...


class SearchAdapter(Protocol):
    def search(self, query: str) -> list[SearchResultItem]: ...


@dataclass
class Providers:
    """The injectable bundle threaded through every turn."""
    model: Optional[ModelAdapter] = None
    search: Optional[SearchAdapter] = None
    clock: Clock = field(default_factory=SystemClock)


def validate_structured(value: Any, schema: tuple[SchemaField, ...]) -> list[str]:
    """Return human-readable violations; empty list means conforming."""
    if not isinstance(value, dict):
        return [f"expected an object, got {type(value).__name__}"]
    violations = []
    checks: dict[str, Callable[[Any], bool]] = {
        "string": lambda v: isinstance(v, str),
        "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
        "boolean": lambda v: isinstance(v, bool),
        "array": lambda v: isinstance(v, list),
        "object": lambda v: isinstance(v, dict),
    }
    for spec in schema:
        if spec.name not in value:
            if spec.required:
                violations.append(f"missing required field {spec.name!r}")
            continue
        if not checks[spec.kind](value[spec.name]):
            violations.append(
                f"field {spec.name!r} must be {spec.kind}, got {type(value[spec.name]).__name__}"
            )
    return violations


def invoke_with_repair(prompt: StructuredPrompt, adapter: ModelAdapter,
                       max_retries: int = 2,
                       events: Optional[list] = None) -> Any:
    """Call the adapter, re-prompting with the violation text on bad output.

    Attempts = 1 + retries used; each attempt is appended to ``events`` when a
    list is supplied.
    """
    if max_retries < 0:
        raise ValueError("max_retries must be >= 0")
    current = prompt
    last_violations: list[str] = []
    for attempt in range(1, max_retries + 2):
        value = adapter.complete(current)
        violations = validate_structured(value, prompt.output_schema)
        if events is not None:
            events.append({"attempt": attempt, "violations": list(violations)})
        if not violations:
            return value
        last_violations = violations
        current = replace(
            current,
            context=current.context + "\n[repair] previous output invalid: " + "; ".join(violations),
        )
    raise SchemaViolation("; ".join(last_violations), attempts=max_retries + 1)


def complete_structured(prompt: StructuredPrompt, adapter: Optional[ModelAdapter],
                        max_retries: int = 2, deadline_ms: int = 30_000,
                        clock: Optional[Clock] = None,
                        events: Optional[list] = None) -> Any:
    """Schema-conforming completion with repair retries and a wall deadline."""
    if adapter is None:
        raise AdapterUnavailable("no model adapter configured")
    clock = clock or SystemClock()
    started = clock.monotonic()
    value = invoke_with_repair(prompt, adapter, max_retries=max_retries, events=events)
    elapsed_ms = (clock.monotonic() - started) * 1000.0
    if elapsed_ms > deadline_ms:
        raise Timeout(f"model call exceeded {deadline_ms} ms (took {elapsed_ms:.0f} ms)")
    return value


def normalize_query(query: str) -> str:
    return " ".join(query.lower().split())


def search(query: str, k: int, adapter: Optional[SearchAdapter]) -> list[SearchResultItem]:
    """At most k results for the query, adapter order preserved."""
    if not 1 <= k <= 10:
        raise ValueError("k must be between 1 and 10")
    if adapter is None:
        raise AdapterUnavailable("no search adapter configured")
    return list(adapter.search(query))[:k]
