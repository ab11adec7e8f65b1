"""The seven workflow nodes and deterministic response assembly."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from .analysis import InsightReport, generate_insights
from .config import Settings
from .customize import apply_patch, parse_customization, validate_patch
from .errors import (
    BadValue,
    IllegalPath,
    IncompatibleMark,
    NoConnection,
    NoFindings,
    NotPlottable,
    UnknownChart,
    WriteAccessRequested,
)
from .explain import Explanation, execute_search_plan, plan_searches, synthesize_explanation
from .intents import Intent, IntentSet
from .providers.core import Providers
from .sqlkit.connection import ConnectionConfig
from .sqlkit.execute import execute_sql
from .sqlkit.generate import generate_sql
from .sqlkit.metadata import retrieve_metadata
from .sqlkit.validate import validate_sql
from .state import NODE_NAMES, ConversationState, ResponseBundle, UserMessage
from .viz import ChartType, build_chart_spec, preprocess, rank_charts, spec_problems

FALLBACK_MESSAGE = (
    "I can visualize data (e.g. \"Show me a bar chart of sales by month\"), "
    "look for trends, anomalies and correlations, explain findings with external "
    "context, customize an existing chart, or connect to a database. "
    "Ask me one of those."
)

_PATH_RE = re.compile(r"(?:connect|attach)[^\n]*?\b(?:to|at)?\s*([\w./~-]+\.(?:db|sqlite3?|sqlite))",
                      re.IGNORECASE)


@dataclass
class TurnContext:
    message: UserMessage
    providers: Providers
    settings: Settings
    intents: Optional[IntentSet] = None
    outputs: dict[str, dict] = field(default_factory=dict)
    errors: list[tuple[str, str]] = field(default_factory=list)

    def record_error(self, code: str, message: str) -> None:
        if (code, message) not in self.errors:
            self.errors.append((code, message))


NodeHandler = Callable[[ConversationState, TurnContext], dict]


def system_node(state: ConversationState, turn: TurnContext) -> dict:
    text = turn.message.text.lower()
    payload = turn.message.payload or {}
    if "dialect" in payload or "location" in payload:
        return _connect(state, turn, payload)
    match = _PATH_RE.search(turn.message.text)
    if "connect" in text and match:
        return _connect(state, turn, {"dialect": "embedded", "location": match.group(1)})
    if "disconnect" in text:
        state.active_connection = None
        state.schema_cache = None
        state.last_table = None
        return {"action": "disconnect", "note": "Disconnected from the database."}
    if "export" in text:
        return {"action": "export_info",
                "note": "Charts can be exported as JSON or CSV via "
                        "/sessions/{id}/charts/{chart_id}/export?format=json|csv."}
    return {"action": "help",
            "note": "To connect, provide a payload with dialect and location "
                    "(e.g. {\"dialect\": \"embedded\", \"location\": \"sales.db\"})."}


def _connect(state: ConversationState, turn: TurnContext, payload: dict) -> dict:
    if payload.get("read_only") is False:
        raise WriteAccessRequested("connections must be read-only")
    config = ConnectionConfig(
        dialect=payload.get("dialect", "embedded"),
        location=str(payload.get("location", "")),
    )
    snapshot = retrieve_metadata(config, now=turn.providers.clock.utcnow())
    state.active_connection = config
    state.schema_cache = snapshot
    return {
        "action": "connect",
        "dialect": config.dialect,
        "tables": snapshot.table_names,
        "note": f"Connected ({config.dialect}); "
                f"{len(snapshot.tables)} table(s): {', '.join(snapshot.table_names) or 'none'}.",
    }


def sql_agent_node(state: ConversationState, turn: TurnContext) -> dict:
    if state.active_connection is None:
        raise NoConnection("no active database connection; connect first")
    if state.schema_cache is None:
        state.schema_cache = retrieve_metadata(state.active_connection,
                                               now=turn.providers.clock.utcnow())
    snapshot = state.schema_cache
    events: list = []
    plan = generate_sql(turn.message.text, snapshot, turn.providers, events=events)
    validated = validate_sql(plan, snapshot, turn.settings.default_limit)
    table = execute_sql(validated, state.active_connection,
                        row_cap=turn.settings.row_cap,
                        deadline_ms=turn.settings.statement_deadline_ms,
                        clock=turn.providers.clock)
    state.last_table = table
    return {
        "sql": validated.sql,
        "generator": plan.generator,
        "row_count": len(table.rows),
        "column_count": len(table.columns),
        "columns": table.column_names,
        "warnings": validated.warnings,
        "truncated": table.truncated,
        "model_events": events,
    }


def _explicit_chart_request(text: str) -> Optional[ChartType]:
    lowered = text.lower()
    for chart in ChartType:
        if re.search(rf"\b{chart.value}\b", lowered):
            return chart
    return None


def visualization_node(state: ConversationState, turn: TurnContext) -> dict:
    if state.last_table is None:
        raise NotPlottable("no query result available to visualize")
    pre = preprocess(state.last_table, categorical_cap=turn.settings.categorical_plot_cap)
    explicit = _explicit_chart_request(turn.message.text)
    ranked = rank_charts(pre.profiles, explicit_request=explicit)
    spec = build_chart_spec(ranked.top(), pre.profiles, pre.table, turn.message.text)
    problems = spec_problems(spec)
    if problems:
        raise NotPlottable("invalid chart spec: " + "; ".join(problems))
    state.upsert_chart(spec)
    points = len(spec.data["values"][spec.data["fields"][0]]) if spec.data["fields"] else 0
    return {
        "chart_id": spec.chart_id,
        "mark": spec.mark.value,
        "title": spec.title,
        "points": points,
        "dropped_rows": pre.dropped_rows,
        "ranking": ranked.to_dict()["entries"],
    }


def analysis_node(state: ConversationState, turn: TurnContext) -> dict:
    if state.last_table is None:
        raise NotPlottable("no query result available to analyze")
    pre = preprocess(state.last_table, categorical_cap=turn.settings.categorical_plot_cap)
    report = generate_insights(
        pre.table, question=turn.message.text, providers=turn.providers,
        r2_threshold=turn.settings.trend_r2_threshold,
        score_threshold=turn.settings.anomaly_score_threshold,
        r_threshold=turn.settings.correlation_r_threshold,
    )
    state.insights.append(report)
    return {"findings": len(report.findings), "narrative": report.narrative,
            "report": report.to_dict()}


def explanation_node(state: ConversationState, turn: TurnContext) -> dict:
    if not state.insights:
        raise NoFindings("no insights available to explain")
    insight = state.insights[-1]
    plan = plan_searches(insight, turn.message.text, turn.providers)
    evidence = execute_search_plan(plan, turn.providers,
                                   k_per_query=turn.settings.search_k)
    explanation = synthesize_explanation(insight, evidence, turn.providers)
    return {
        "queries": plan.queries,
        "evidence_count": len(evidence.items),
        "search_warnings": evidence.warnings,
        "explanation": explanation.to_dict(),
    }


def customizer_node(state: ConversationState, turn: TurnContext) -> dict:
    chart = state.latest_chart()
    if chart is None:
        raise UnknownChart("there is no chart to customize yet")
    patch = parse_customization(turn.message.text, chart, turn.providers)
    validation = validate_patch(chart, patch)
    if not validation.ok:
        code, message = validation.errors[0]
        exc = {"IllegalPath": IllegalPath, "BadValue": BadValue,
               "IncompatibleMark": IncompatibleMark}.get(code, BadValue)
        raise exc(message)
    updated = apply_patch(chart, patch, validation)
    state.upsert_chart(updated)
    return {
        "chart_id": updated.chart_id,
        "title": updated.title,
        "revision": updated.revision,
        "ops": [op.to_dict() for op in patch.ops],
        "warnings": validation.warnings,
    }


def response_node(state: ConversationState, turn: TurnContext) -> dict:
    bundle = generate_response(state, turn.outputs)
    return {"bundle": bundle.to_dict()}


def generate_response(state: ConversationState, step_outputs: dict[str, dict]) -> ResponseBundle:
    """Compile step outputs into the user-facing bundle.

    Message sections follow the fixed node order: connection note, data
    summary, chart caption, insight narrative, explanation, then one notice
    per distinct error code. Pure templating; no model involved.
    """
    sections: list[str] = []
    charts: list = []
    insight: Optional[InsightReport] = None
    explanation: Optional[Explanation] = None
    errors: list[tuple[str, str]] = []

    for node in NODE_NAMES:
        output = step_outputs.get(node)
        if output is None:
            continue
        if "error" in output:
            code = output["error"]["code"]
            message = output["error"]["message"]
            if all(code != c for c, _ in errors):
                errors.append((code, message))
            continue
        if node == "System" and output.get("note"):
            sections.append(output["note"])
        elif node == "SqlAgent":
            sections.append(
                f"Fetched {output['row_count']} rows × {output['column_count']} columns.")
        elif node == "VisualizationAgent":
            chart = state.chart_by_id(output["chart_id"])
            if chart is not None:
                charts.append(chart)
            sections.append(
                f"Chart \"{output['title']}\" ({output['mark']}, {output['points']} points).")
        elif node == "AnalysisAgent":
            insight = InsightReport.from_dict(output["report"])
            sections.append(output["narrative"])
        elif node == "ExplanationAgent":
            explanation = Explanation.from_dict(output["explanation"])
            sections.append(explanation.text)
        elif node == "Customizer":
            chart = state.chart_by_id(output["chart_id"])
            if chart is not None and all(c.chart_id != chart.chart_id for c in charts):
                charts.append(chart)
            sections.append(
                f"Updated chart \"{output['title']}\" "
                f"({len(output['ops'])} change(s), revision {output['revision']}).")

    for code, message in errors:
        sections.append(f"Problem ({code}): {message}")

    if not sections:
        sections.append(FALLBACK_MESSAGE)
    return ResponseBundle(message=" ".join(sections), charts=charts,
                          insight=insight, explanation=explanation, errors=errors)


def default_registry() -> dict[str, NodeHandler]:
    return {
        "System": system_node,
        "SqlAgent": sql_agent_node,
        "VisualizationAgent": visualization_node,
        "AnalysisAgent": analysis_node,
        "ExplanationAgent": explanation_node,
        "Customizer": customizer_node,
        "ResponseGenerator": response_node,
    }
