"""Conversational data exploration: natural language in, SQL + charts +
insights + cited explanations out, over a session-oriented workflow."""

__version__ = "0.1.0"

from .config import Settings
from .intents import Intent, IntentSet, classify, rule_classify
from .providers.core import Providers
from .state import ConversationState, ResponseBundle, TraceEvent, UserMessage
from .workflow import (
    WorkflowGraph,
    compile_workflow,
    default_graph,
    replay_trace,
    route,
    run_turn,
)

__all__ = [
    "Settings", "Intent", "IntentSet", "classify", "rule_classify",
    "Providers", "ConversationState", "ResponseBundle", "TraceEvent",
    "UserMessage", "WorkflowGraph", "compile_workflow", "default_graph",
    "replay_trace", "route", "run_turn", "__version__",
]
