"""The state-driven workflow engine: compile, route, execute, replay.

A turn classifies the message, routes the intents to an execution plan over
the seven fixed-precedence nodes, runs each step with error containment, and
always finishes with the response generator. Every executed step leaves a
trace event whose digests make stub-provider turns bit-replayable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Optional

from .canonical import digest
from .config import Settings
from .errors import DataChatError, DigestMismatch, MissingNode
from .intents import Intent, IntentSet, classify
from .nodes import NodeHandler, TurnContext, default_registry, generate_response
from .providers.core import Providers
from .state import (
    NODE_NAMES,
    ConversationState,
    ExecutionPlan,
    ResponseBundle,
    TraceEvent,
    UserMessage,
)

# Static intra-plan dependencies: a step is skipped when a step it depends on
# (and that is present earlier in the plan) failed or was skipped.
_DEPENDENCIES = {
    "VisualizationAgent": ("SqlAgent",),
    "AnalysisAgent": ("SqlAgent",),
    "ExplanationAgent": ("AnalysisAgent",),
    "Customizer": ("VisualizationAgent",),
}

_CLASSIFIER_NODE = "IntentClassifier"


@dataclass(frozen=True)
class WorkflowGraph:
    handlers: Mapping[str, NodeHandler]
    topology_digest: str


def compile_workflow(node_registry: dict[str, NodeHandler]) -> WorkflowGraph:
    """Freeze a registry into an immutable graph; all seven nodes required."""
    for name in NODE_NAMES:
        if name not in node_registry:
            raise MissingNode(f"node registry lacks {name!r}")
    handlers = MappingProxyType({name: node_registry[name] for name in NODE_NAMES})
    topology = {
        "nodes": list(NODE_NAMES),
        "edges": [[NODE_NAMES[i], NODE_NAMES[i + 1]] for i in range(len(NODE_NAMES) - 1)],
        "dependencies": {k: list(v) for k, v in _DEPENDENCIES.items()},
    }
    return WorkflowGraph(handlers=handlers, topology_digest=digest(topology))


def default_graph() -> WorkflowGraph:
    return compile_workflow(default_registry())


def mentions_new_data(text: str, state: ConversationState) -> bool:
    """True when the message names a schema column the cached result table
    does not already carry."""
    if state.schema_cache is None:
        return False
    tokens = set(re.findall(r"[a-z0-9_]+", text.lower()))
    have = {name.lower() for name in state.last_table.column_names} if state.last_table else set()
    for table in state.schema_cache.tables:
        for column in table.columns:
            lowered = column.name.lower()
            if lowered in tokens and lowered not in have:
                return True
    return False


def route(intents: IntentSet, state: ConversationState) -> ExecutionPlan:
    """Map intents to the ordered node plan (total: never fails)."""
    steps: set[str] = set()
    if intents.has(Intent.SYSTEM):
        steps.add("System")
    if intents.has(Intent.VISUALIZATION):
        steps.update(("SqlAgent", "VisualizationAgent"))
    if intents.has(Intent.INSIGHT):
        steps.add("AnalysisAgent")
        if state.last_table is None or mentions_new_data(intents.message_text, state):
            steps.add("SqlAgent")
    if intents.has(Intent.EXPLANATION):
        steps.add("ExplanationAgent")
        if not state.insights:
            steps.update(("SqlAgent", "AnalysisAgent"))
    if intents.has(Intent.CUSTOMIZATION):
        steps.add("Customizer")
    ordered = [name for name in NODE_NAMES if name in steps]
    ordered.append("ResponseGenerator")
    return ExecutionPlan(steps=ordered)


def run_turn(state: ConversationState, message: UserMessage, graph: WorkflowGraph,
             providers: Providers, settings: Optional[Settings] = None,
             ) -> tuple[ConversationState, ResponseBundle]:
    """Execute one conversational turn; never raises for node failures."""
    if state.session_id != message.session_id:
        raise ValueError("state does not belong to the message's session")
    state_out, bundle, _ = _execute_turn(state, message, graph, providers,
                                         settings or Settings(), verify=None)
    return state_out, bundle


def replay_trace(state_before: ConversationState, message: UserMessage,
                 trace: list[TraceEvent], graph: WorkflowGraph,
                 providers: Providers, settings: Optional[Settings] = None,
                 ) -> ResponseBundle:
    """Re-execute a recorded stub-provider turn, verifying digests.

    Recorded events are matched positionally; a node-name or digest
    disagreement raises DigestMismatch. Steps beyond the recorded trace are
    executed unchecked, so an empty trace degrades to a plain re-run.
    """
    _, bundle, _ = _execute_turn(state_before, message, graph, providers,
                                 settings or Settings(), verify=list(trace))
    return bundle


def _execute_turn(state: ConversationState, message: UserMessage,
                  graph: WorkflowGraph, providers: Providers, settings: Settings,
                  verify: Optional[list[TraceEvent]],
                  ) -> tuple[ConversationState, ResponseBundle, list[TraceEvent]]:
    work = state.copy()
    clock = providers.clock
    new_events: list[TraceEvent] = []
    verify_idx = 0

    latest = work.latest_chart()
    known_columns: list[str] = []
    if work.schema_cache is not None:
        for table in work.schema_cache.tables:
            known_columns.extend(c.name for c in table.columns)
    intents, classifier_fell_back = classify(
        message.text,
        has_chart=bool(work.charts),
        has_insight=bool(work.insights),
        providers=providers,
        chart_fields=list(latest.data.get("fields", [])) if latest else None,
        known_columns=known_columns,
    )
    intents.message_text = message.text  # used by the Insight refetch decision
    if classifier_fell_back:
        new_events.append(TraceEvent(
            node=_CLASSIFIER_NODE,
            input_digest=digest({"node": _CLASSIFIER_NODE, "text": message.text}),
            output_digest=digest(intents.to_dict()),
            duration_ms=0.0,
            status="error:AdapterUnavailable",
        ))

    plan = route(intents, work)
    turn = TurnContext(message=message, providers=providers, settings=settings,
                       intents=intents)
    unavailable: set[str] = set()

    for node in plan.steps:
        failed_dep = next(
            (dep for dep in _DEPENDENCIES.get(node, ())
             if dep in plan.steps and dep in unavailable),
            None,
        )
        input_digest = digest({
            "node": node,
            "message": message.to_dict(),
            "state": work.stable_digest(),
            "outputs": turn.outputs,
        })
        if failed_dep is not None:
            output = {"error": {"code": "SkippedDependency",
                                "message": f"skipped because {failed_dep} did not complete"}}
            status = "error:SkippedDependency"
            duration = 0.0
            unavailable.add(node)
        else:
            started = clock.monotonic()
            try:
                output = graph.handlers[node](work, turn)
                status = "ok"
            except DataChatError as exc:
                output = {"error": {"code": exc.code, "message": str(exc)}}
                status = f"error:{exc.code}"
                turn.record_error(exc.code, str(exc))
                unavailable.add(node)
            except Exception as exc:  # noqa: BLE001 - containment boundary
                output = {"error": {"code": "InternalError", "message": str(exc)}}
                status = "error:InternalError"
                turn.record_error("InternalError", str(exc))
                unavailable.add(node)
            duration = (clock.monotonic() - started) * 1000.0
        if status == "error:SkippedDependency":
            turn.record_error("SkippedDependency", output["error"]["message"])
        turn.outputs[node] = output
        output_digest = digest(output)

        if verify is not None and verify_idx < len(verify):
            recorded = verify[verify_idx]
            verify_idx += 1
            if recorded.node != node:
                raise DigestMismatch(f"trace expects node {recorded.node!r}, ran {node!r}")
            if recorded.input_digest != input_digest:
                raise DigestMismatch(f"input digest mismatch at node {node}")
            if recorded.output_digest != output_digest:
                raise DigestMismatch(f"output digest mismatch at node {node}")

        new_events.append(TraceEvent(node=node, input_digest=input_digest,
                                     output_digest=output_digest,
                                     duration_ms=duration, status=status))

    rg_output = turn.outputs.get("ResponseGenerator", {})
    if "bundle" in rg_output:
        bundle = ResponseBundle.from_dict(rg_output["bundle"])
    else:
        # the generator itself failed; degrade to a minimal bundle
        bundle = generate_response(work, turn.outputs)
        for code, msg in turn.errors:
            if all(code != c for c, _ in bundle.errors):
                bundle.errors.append((code, msg))

    work.trace.extend(new_events)
    work.history.append((message, bundle))
    return work, bundle, new_events
