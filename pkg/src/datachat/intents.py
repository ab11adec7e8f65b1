"""Intent classification: rule lexicon first, optional model refinement.

The lexicons are word/phrase lists matched against the lowercased message;
rule hits carry confidence 1.0. A model adapter may add intents (confidence
< 1.0) but can never remove a rule hit, and labels outside the six are
discarded. Lexicons can be extended from a plain-text config file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .errors import DataChatError
from .providers.core import Providers, complete_structured, prompt


class Intent(str, Enum):
    VISUALIZATION = "Visualization"
    INSIGHT = "Insight"
    EXPLANATION = "Explanation"
    CUSTOMIZATION = "Customization"
    SYSTEM = "System"
    OTHER = "Other"


# Precedence used for ordering intent sets (Other is always alone).
INTENT_ORDER = (Intent.VISUALIZATION, Intent.INSIGHT, Intent.EXPLANATION,
                Intent.CUSTOMIZATION, Intent.SYSTEM)

DEFAULT_LEXICONS: dict[Intent, tuple[str, ...]] = {
    Intent.VISUALIZATION: (
        "chart", "plot", "graph", "show", "visualize", "bar", "line", "scatter",
        "histogram", "heatmap", "pie", "trend over time",
    ),
    Intent.INSIGHT: (
        "trend", "anomaly", "anomalies", "spike", "pattern", "correlation",
        "unusual", "outlier", "insight",
    ),
    Intent.EXPLANATION: ("explain", "why", "reason", "context"),
    Intent.CUSTOMIZATION: (
        "change", "recolor", "rename", "resize", "retitle", "make it",
        "set the", "switch to",
    ),
    Intent.SYSTEM: ("connect", "disconnect", "database", "export"),
}


@dataclass(frozen=True)
class IntentEntry:
    intent: Intent
    confidence: float
    source: str  # rule | model


@dataclass
class IntentSet:
    entries: list[IntentEntry]
    message_text: str = ""  # carried for routing decisions; not serialized

    def __post_init__(self):
        if not self.entries:
            raise ValueError("intent set must be non-empty")
        intents = [e.intent for e in self.entries]
        if len(set(intents)) != len(intents):
            raise ValueError("duplicate intents")
        if Intent.OTHER in intents and len(intents) > 1:
            raise ValueError("Other must appear alone")

    @property
    def intents(self) -> list[Intent]:
        return [e.intent for e in self.entries]

    def has(self, intent: Intent) -> bool:
        return intent in self.intents

    def to_dict(self) -> dict:
        return {"entries": [[e.intent.value, e.confidence, e.source]
                            for e in self.entries]}


def load_lexicons(path: str | Path) -> dict[Intent, tuple[str, ...]]:
    """Read ``intent: kw, kw, ...`` lines; unlisted intents keep defaults."""
    lexicons = dict(DEFAULT_LEXICONS)
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        name, sep, rest = stripped.partition(":")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'intent: keywords'")
        intent = Intent(name.strip())
        keywords = tuple(k.strip().lower() for k in rest.split(",") if k.strip())
        lexicons[intent] = keywords
    return lexicons


def _matches(text_lower: str, keyword: str) -> bool:
    return re.search(rf"\b{re.escape(keyword)}\b", text_lower) is not None


def rule_classify(text: str, has_chart: bool = False, has_insight: bool = False,
                  lexicons: Optional[dict[Intent, tuple[str, ...]]] = None,
                  chart_fields: Optional[Iterable[str]] = None,
                  known_columns: Optional[Iterable[str]] = None) -> IntentSet:
    """Classify against the keyword lexicons.

    When Customization fires on a session that already has a chart, the
    Visualization hit is suppressed unless the text names a known data column
    that the active chart does not use (a fresh-data request).
    """
    lexicons = lexicons or DEFAULT_LEXICONS
    lowered = text.strip().lower()
    if not lowered:
        return IntentSet([IntentEntry(Intent.OTHER, 1.0, "rule")])

    hits = [intent for intent in INTENT_ORDER
            if any(_matches(lowered, kw) for kw in lexicons.get(intent, ()))]

    if Intent.CUSTOMIZATION in hits and has_chart and Intent.VISUALIZATION in hits:
        if not _names_new_column(lowered, chart_fields, known_columns):
            hits.remove(Intent.VISUALIZATION)

    if not hits:
        return IntentSet([IntentEntry(Intent.OTHER, 1.0, "rule")])
    return IntentSet([IntentEntry(intent, 1.0, "rule") for intent in hits])


def _names_new_column(text_lower: str, chart_fields: Optional[Iterable[str]],
                      known_columns: Optional[Iterable[str]]) -> bool:
    if not known_columns:
        return False
    used = {f.lower() for f in (chart_fields or ())}
    tokens = set(re.findall(r"[a-z0-9_]+", text_lower))
    return any(col.lower() in tokens and col.lower() not in used
               for col in known_columns)


def classify(text: str, has_chart: bool = False, has_insight: bool = False,
             providers: Optional[Providers] = None,
             lexicons: Optional[dict[Intent, tuple[str, ...]]] = None,
             chart_fields: Optional[Iterable[str]] = None,
             known_columns: Optional[Iterable[str]] = None) -> tuple[IntentSet, bool]:
    """Rule classification plus optional model refinement.

    Returns (intents, provider_failed). The model may only add labels from
    the six; rule hits are never removed; when every label is additive, Other
    is dropped in favor of the real intents.
    """
    base = rule_classify(text, has_chart, has_insight, lexicons=lexicons,
                         chart_fields=chart_fields, known_columns=known_columns)
    if providers is None or providers.model is None:
        return base, False

    context = (f"message: {text}\nrule intents: "
               f"{', '.join(i.value for i in base.intents)}\n"
               "Add any missing intents from: Visualization, Insight, Explanation, "
               "Customization, System.")
    request = prompt("intent_refine", context, ("intents", "array", True))
    try:
        value = complete_structured(request, providers.model, clock=providers.clock)
    except DataChatError:
        return base, True

    additions = []
    valid = {i.value: i for i in INTENT_ORDER}
    for label in value["intents"]:
        if not isinstance(label, str) or label not in valid:
            continue  # labels outside the six are discarded
        intent = valid[label]
        if not base.has(intent) and intent not in (a.intent for a in additions):
            additions.append(IntentEntry(intent, 0.6, "model"))
    if not additions:
        return base, False

    entries = [e for e in base.entries if e.intent != Intent.OTHER]
    entries.extend(additions)
    entries.sort(key=lambda e: INTENT_ORDER.index(e.intent))
    return IntentSet(entries), False
