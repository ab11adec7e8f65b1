"""Deterministic offline stand-ins for the model, search and clock."""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Callable, Optional

from ..errors import AdapterUnavailable
from .core import SearchResultItem, StructuredPrompt, normalize_query


def fixture_key(text: str, length: int = 16) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:length]


class StubClock:
    """Starts at a fixed instant and advances a fixed step per reading."""

    def __init__(self, start: Optional[datetime] = None, step_ms: float = 1.0):
        self._now = start or datetime(2024, 1, 1, tzinfo=timezone.utc)
        self._mono = 0.0
        self._step = step_ms / 1000.0

    def monotonic(self) -> float:
        self._mono += self._step
        return self._mono

    def utcnow(self) -> datetime:
        self._now += timedelta(seconds=self._step)
        return self._now


class StubModelAdapter:
    """Fixture-backed model: per-task handlers plus an optional script.

    ``script`` entries (values or exceptions) are consumed first, one per
    call, which makes repair/timeout sequences easy to stage in tests. With
    no script and no handler for the task tag the adapter reports itself
    unavailable, which downstream code treats as "fall back to rules".
    """

    def __init__(self,
                 handlers: Optional[dict[str, Callable[[str], Any]]] = None,
                 script: Optional[list] = None):
        self.handlers = dict(handlers or {})
        self.script = list(script or [])
        self.calls: list[StructuredPrompt] = []

    def complete(self, prompt: StructuredPrompt) -> Any:
        self.calls.append(prompt)
        if self.script:
            step = self.script.pop(0)
            if isinstance(step, Exception):
                raise step
            return step
        handler = self.handlers.get(prompt.task_tag)
        if handler is None:
            raise AdapterUnavailable(f"no stub fixture for task {prompt.task_tag!r}")
        return handler(prompt.context)


class DirectoryModelAdapter:
    """Serves fixtures from ``<dir>/<task_tag>-<digest16(context)>.json``."""

    def __init__(self, fixture_dir: str | Path):
        self.fixture_dir = Path(fixture_dir)

    def fixture_path(self, prompt: StructuredPrompt) -> Path:
        return self.fixture_dir / f"{prompt.task_tag}-{fixture_key(prompt.context)}.json"

    def complete(self, prompt: StructuredPrompt) -> Any:
        path = self.fixture_path(prompt)
        if not path.exists():
            raise AdapterUnavailable(f"no fixture file {path.name}")
        return json.loads(path.read_text(encoding="utf-8"))


def _to_items(query: str, raw: list) -> list[SearchResultItem]:
    items = []
    for entry in raw:
        items.append(SearchResultItem(
            query=query,
            title=entry.get("title", ""),
            url=entry["url"],
            snippet=entry.get("snippet", ""),
        ))
    return items


class StubSearchAdapter:
    """In-memory fixtures keyed by normalized query; missing query => []."""

    def __init__(self, fixtures: Optional[dict[str, list[dict]]] = None,
                 failing_queries: Optional[set[str]] = None):
        self.fixtures = {normalize_query(q): v for q, v in (fixtures or {}).items()}
        self.failing = {normalize_query(q) for q in (failing_queries or set())}
        self.queries: list[str] = []

    def search(self, query: str) -> list[SearchResultItem]:
        self.queries.append(query)
        normalized = normalize_query(query)
        if normalized in self.failing:
            raise AdapterUnavailable(f"stub outage for query {query!r}")
        return _to_items(query, self.fixtures.get(normalized, []))


class DirectorySearchAdapter:
    """Serves fixtures from ``<dir>/search-<digest16(normalized query)>.json``."""

    def __init__(self, fixture_dir: str | Path):
        self.fixture_dir = Path(fixture_dir)

    def fixture_path(self, query: str) -> Path:
        return self.fixture_dir / f"search-{fixture_key(normalize_query(query))}.json"

    def search(self, query: str) -> list[SearchResultItem]:
        path = self.fixture_path(query)
        if not path.exists():
            return []
        return _to_items(query, json.loads(path.read_text(encoding="utf-8")))
