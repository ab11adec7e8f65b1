"""Session state: messages, traces, response bundles, and the canonical
serialized form that makes turns replayable."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .analysis import InsightReport
from .canonical import canonical_json, digest
from .explain import Explanation
from .sqlkit.connection import ConnectionConfig
from .sqlkit.metadata import SchemaSnapshot
from .tabular import ResultTable
from .viz import ChartSpec

import json

NODE_NAMES = (
    "System", "SqlAgent", "VisualizationAgent", "AnalysisAgent",
    "ExplanationAgent", "Customizer", "ResponseGenerator",
)


@dataclass
class UserMessage:
    session_id: str
    text: str
    received_at: str = ""
    payload: Optional[dict] = None  # optional structured payload (e.g. connection info)

    def to_dict(self) -> dict:
        return {"session_id": self.session_id, "text": self.text,
                "received_at": self.received_at, "payload": self.payload}

    @classmethod
    def from_dict(cls, data: dict) -> "UserMessage":
        return cls(session_id=data["session_id"], text=data["text"],
                   received_at=data.get("received_at", ""), payload=data.get("payload"))


@dataclass
class TraceEvent:
    node: str
    input_digest: str
    output_digest: str
    duration_ms: float
    status: str  # "ok" or "error:<code>"

    def to_dict(self) -> dict:
        return {"node": self.node, "input_digest": self.input_digest,
                "output_digest": self.output_digest, "duration_ms": self.duration_ms,
                "status": self.status}

    @classmethod
    def from_dict(cls, data: dict) -> "TraceEvent":
        return cls(node=data["node"], input_digest=data["input_digest"],
                   output_digest=data["output_digest"],
                   duration_ms=data["duration_ms"], status=data["status"])

    def export_line(self) -> str:
        # newline-delimited export, fields in declaration order
        return json.dumps([self.node, self.input_digest, self.output_digest,
                           self.duration_ms, self.status])

    @classmethod
    def from_export_line(cls, line: str) -> "TraceEvent":
        node, input_digest, output_digest, duration_ms, status = json.loads(line)
        return cls(node, input_digest, output_digest, duration_ms, status)


@dataclass
class ResponseBundle:
    message: str
    charts: list[ChartSpec] = field(default_factory=list)
    insight: Optional[InsightReport] = None
    explanation: Optional[Explanation] = None
    errors: list[tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "message": self.message,
            "charts": [c.to_dict() for c in self.charts],
            "insight": self.insight.to_dict() if self.insight else None,
            "explanation": self.explanation.to_dict() if self.explanation else None,
            "errors": [list(e) for e in self.errors],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ResponseBundle":
        return cls(
            message=data["message"],
            charts=[ChartSpec.from_dict(c) for c in data.get("charts", [])],
            insight=InsightReport.from_dict(data["insight"]) if data.get("insight") else None,
            explanation=Explanation.from_dict(data["explanation"])
            if data.get("explanation") else None,
            errors=[tuple(e) for e in data.get("errors", [])],
        )


@dataclass
class ExecutionPlan:
    steps: list[str]

    def __post_init__(self):
        if not self.steps or self.steps[-1] != "ResponseGenerator":
            raise ValueError("plan must end with ResponseGenerator")
        if len(set(self.steps)) != len(self.steps):
            raise ValueError("plan steps must be unique")
        order = {name: i for i, name in enumerate(NODE_NAMES)}
        for name in self.steps:
            if name not in order:
                raise ValueError(f"unknown node {name!r}")
        indexes = [order[name] for name in self.steps]
        if indexes != sorted(indexes):
            raise ValueError("plan violates the fixed node precedence")

    def to_dict(self) -> dict:
        return {"steps": list(self.steps)}


@dataclass
class ConversationState:
    session_id: str
    history: list[tuple[UserMessage, ResponseBundle]] = field(default_factory=list)
    active_connection: Optional[ConnectionConfig] = None
    schema_cache: Optional[SchemaSnapshot] = None
    last_table: Optional[ResultTable] = None
    charts: list[ChartSpec] = field(default_factory=list)
    insights: list[InsightReport] = field(default_factory=list)
    trace: list[TraceEvent] = field(default_factory=list)

    def chart_by_id(self, chart_id: str) -> Optional[ChartSpec]:
        for chart in self.charts:
            if chart.chart_id == chart_id:
                return chart
        return None

    def latest_chart(self) -> Optional[ChartSpec]:
        return self.charts[-1] if self.charts else None

    def upsert_chart(self, spec: ChartSpec) -> None:
        for idx, chart in enumerate(self.charts):
            if chart.chart_id == spec.chart_id:
                self.charts[idx] = spec
                self.charts.append(self.charts.pop(idx))  # updated chart becomes latest
                return
        self.charts.append(spec)

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "history": [[m.to_dict(), b.to_dict()] for m, b in self.history],
            "active_connection": self.active_connection.to_dict()
            if self.active_connection else None,
            "schema_cache": self.schema_cache.to_dict() if self.schema_cache else None,
            "last_table": self.last_table.to_dict() if self.last_table else None,
            "charts": [c.to_dict() for c in self.charts],
            "insights": [i.to_dict() for i in self.insights],
            "trace": [t.to_dict() for t in self.trace],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConversationState":
        return cls(
            session_id=data["session_id"],
            history=[(UserMessage.from_dict(m), ResponseBundle.from_dict(b))
                     for m, b in data.get("history", [])],
            active_connection=ConnectionConfig.from_dict(data["active_connection"])
            if data.get("active_connection") else None,
            schema_cache=SchemaSnapshot.from_dict(data["schema_cache"])
            if data.get("schema_cache") else None,
            last_table=ResultTable.from_dict(data["last_table"])
            if data.get("last_table") else None,
            charts=[ChartSpec.from_dict(c) for c in data.get("charts", [])],
            insights=[InsightReport.from_dict(i) for i in data.get("insights", [])],
            trace=[TraceEvent.from_dict(t) for t in data.get("trace", [])],
        )

    def to_text(self) -> str:
        """Canonical text form; loss-free round-trip with ``from_text``."""
        return canonical_json(self.to_dict())

    @classmethod
    def from_text(cls, text: str) -> "ConversationState":
        return cls.from_dict(json.loads(text))

    def copy(self) -> "ConversationState":
        return ConversationState.from_text(self.to_text())

    def stable_digest(self) -> str:
        """State digest excluding the trace (durations are timing-dependent)."""
        data = self.to_dict()
        data.pop("trace", None)
        return digest(data)


def export_trace(events: list[TraceEvent]) -> str:
    return "\n".join(event.export_line() for event in events) + ("\n" if events else "")


def parse_trace(text: str) -> list[TraceEvent]:
    return [TraceEvent.from_export_line(line)
            for line in text.splitlines() if line.strip()]
