"""Explanation agent: search planning, evidence gathering, cited synthesis.

Citations can only come from gathered evidence; when nothing was found the
explanation is marked ungrounded and carries a fixed marker string.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .canonical import digest
from .errors import DataChatError, NoFindings
from .analysis import (
    AnomalyFinding,
    CorrelationFinding,
    Finding,
    InsightReport,
    TrendFinding,
)
from .providers.core import Providers, SearchResultItem, complete_structured, prompt, search

UNGROUNDED_MARKER = "no external context available"

MAX_QUERIES = 3
MAX_QUERY_LEN = 200
MAX_KEYWORDS = 4

_STOPWORDS = frozenset({
    "the", "a", "an", "of", "in", "on", "to", "for", "this", "that", "these",
    "is", "was", "are", "were", "me", "my", "our", "it", "its", "and", "or",
    "show", "find", "explain", "why", "what", "how", "did", "do", "does",
    "any", "with", "by", "from", "about", "please", "can", "you",
})


@dataclass
class SearchPlan:
    queries: list[str]
    rationale: str
    insight_digest: str

    def to_dict(self) -> dict:
        return {"queries": list(self.queries), "rationale": self.rationale,
                "insight_digest": self.insight_digest}


@dataclass
class EvidenceSet:
    items: list[SearchResultItem]
    plan_digest: str
    warnings: list[str] = field(default_factory=list)

    def urls(self) -> list[str]:
        return [item.url for item in self.items]

    def to_dict(self) -> dict:
        return {"items": [i.to_dict() for i in self.items],
                "plan_digest": self.plan_digest, "warnings": list(self.warnings)}


@dataclass
class Explanation:
    text: str
    citations: list[str]
    insight_digest: str
    grounded: bool

    def to_dict(self) -> dict:
        return {"text": self.text, "citations": list(self.citations),
                "insight_digest": self.insight_digest, "grounded": self.grounded}

    @classmethod
    def from_dict(cls, data: dict) -> "Explanation":
        return cls(text=data["text"], citations=list(data["citations"]),
                   insight_digest=data["insight_digest"], grounded=bool(data["grounded"]))


def plan_searches(insight: InsightReport, question: str,
                  providers: Optional[Providers] = None) -> SearchPlan:
    """One query per top finding (at most three), from a fixed template.

    The providers argument is accepted for interface symmetry; planning stays
    deterministic.
    """
    if not insight.findings:
        raise NoFindings("insight report has no findings to explain")
    keywords = _keywords(question, insight.findings)
    queries: list[str] = []
    for finding in insight.findings[:MAX_QUERIES]:
        query = " ".join([_subject(finding), _descriptor(finding), *keywords]).strip()
        query = " ".join(query.split())[:MAX_QUERY_LEN]
        if query and query not in queries:
            queries.append(query)
    return SearchPlan(
        queries=queries,
        rationale=f"one query per top finding ({len(queries)} of {len(insight.findings)})",
        insight_digest=digest(insight),
    )


def _subject(finding: Finding) -> str:
    if isinstance(finding, CorrelationFinding):
        return f"{finding.field_a} {finding.field_b}"
    return finding.field


def _descriptor(finding: Finding) -> str:
    if isinstance(finding, TrendFinding):
        return "increase" if finding.direction == "increasing" else "decline"
    if isinstance(finding, AnomalyFinding):
        return "anomaly"
    return "correlation"


def _keywords(question: str, findings: list[Finding]) -> list[str]:
    fields = set()
    for finding in findings:
        fields.update(_subject(finding).lower().split())
    tokens = re.findall(r"[a-z0-9_]+", question.lower())
    out = []
    for token in tokens:
        if token in _STOPWORDS or token in fields or token in out:
            continue
        out.append(token)
        if len(out) >= MAX_KEYWORDS:
            break
    return out


def execute_search_plan(plan: SearchPlan, providers: Providers,
                        k_per_query: int = 3) -> EvidenceSet:
    """Run every query, tolerating per-query outages; results deduped by url."""
    if not 1 <= k_per_query <= 5:
        raise ValueError("k_per_query must be between 1 and 5")
    items: list[SearchResultItem] = []
    seen: set[str] = set()
    warnings: list[str] = []
    failures = 0
    for query in plan.queries:
        try:
            results = search(query, k_per_query, providers.search)
        except DataChatError as exc:
            failures += 1
            warnings.append(f"search failed for {query!r}: {exc.code}")
            continue
        for item in results:
            if item.url in seen:
                continue
            seen.add(item.url)
            items.append(item)
    if plan.queries and failures == len(plan.queries):
        warnings.append("all queries failed")
    return EvidenceSet(items=items, plan_digest=digest(plan), warnings=warnings)


def synthesize_explanation(insight: InsightReport, evidence: EvidenceSet,
                           providers: Optional[Providers] = None) -> Explanation:
    """Weave findings with evidence snippets; citations stay within evidence."""
    if not insight.findings:
        raise NoFindings("insight report has no findings to explain")
    insight_ref = digest(insight)
    if not evidence.items:
        return Explanation(
            text=f"{insight.narrative} ({UNGROUNDED_MARKER})",
            citations=[], insight_digest=insight_ref, grounded=False,
        )

    if providers is not None and providers.model is not None:
        model_text = _maybe_synthesize(insight, evidence, providers)
        if model_text is not None:
            return Explanation(text=model_text[0], citations=model_text[1],
                               insight_digest=insight_ref, grounded=True)

    cited = evidence.items[:3]
    parts = [insight.narrative, "External context:"]
    for item in cited:
        snippet = item.snippet.strip()
        if len(snippet) > 200:
            snippet = snippet[:200].rstrip() + "..."
        parts.append(f'"{snippet}" ({item.url})')
    return Explanation(
        text=" ".join(parts),
        citations=[item.url for item in cited],
        insight_digest=insight_ref,
        grounded=True,
    )


def _maybe_synthesize(insight: InsightReport, evidence: EvidenceSet,
                      providers: Providers) -> Optional[tuple[str, list[str]]]:
    lines = [f"- {i.title}: {i.snippet} ({i.url})" for i in evidence.items]
    context = (f"findings: {insight.narrative}\nevidence:\n" + "\n".join(lines) +
               "\nWrite a short explanation citing the evidence urls you use.")
    request = prompt("explain_synthesize", context,
                     ("text", "string", True), ("citations", "array", True))
    try:
        value = complete_structured(request, providers.model, clock=providers.clock)
    except DataChatError:
        return None
    allowed = set(evidence.urls())
    citations = [u for u in value["citations"] if isinstance(u, str) and u in allowed]
    if not value["text"] or not citations:
        return None
    return value["text"], citations
