"""Insight detection: trends, anomalies, correlations, and the narrative.

Detector choices are deliberately plain and fully deterministic: ordinary
least squares gated on R^2, the Iglewicz-Hoaglin modified z-score at 3.5, and
Pearson correlation at |r| >= 0.7. A model adapter may rephrase the narrative
but findings come only from the detectors.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .errors import DataChatError, NothingToAnalyze
from .providers.core import Providers, complete_structured, prompt
from .tabular import ResultTable, SemanticType, parse_temporal

MODIFIED_Z_FACTOR = 0.6745
DEGENERATE_SCORE = sys.float_info.max


@dataclass
class TrendFinding:
    field: str
    slope: float
    intercept: float
    r2: float
    direction: str  # increasing | decreasing
    per_day: bool = False

    def to_dict(self) -> dict:
        return {"kind": "trend", "field": self.field, "slope": self.slope,
                "intercept": self.intercept, "r2": self.r2,
                "direction": self.direction, "per_day": self.per_day}


@dataclass
class AnomalyFinding:
    field: str
    row_index: int
    value: float
    score: float
    rule: str  # mad | mad_degenerate

    def to_dict(self) -> dict:
        return {"kind": "anomaly", "field": self.field, "row_index": self.row_index,
                "value": self.value, "score": self.score, "rule": self.rule}


@dataclass
class CorrelationFinding:
    field_a: str
    field_b: str
    r: float
    n: int

    def to_dict(self) -> dict:
        return {"kind": "correlation", "field_a": self.field_a,
                "field_b": self.field_b, "r": self.r, "n": self.n}


Finding = Union[TrendFinding, AnomalyFinding, CorrelationFinding]


def finding_from_dict(data: dict) -> Finding:
    kind = data["kind"]
    if kind == "trend":
        return TrendFinding(data["field"], data["slope"], data["intercept"],
                            data["r2"], data["direction"], data.get("per_day", False))
    if kind == "anomaly":
        return AnomalyFinding(data["field"], data["row_index"], data["value"],
                              data["score"], data["rule"])
    if kind == "correlation":
        return CorrelationFinding(data["field_a"], data["field_b"], data["r"], data["n"])
    raise ValueError(f"unknown finding kind: {kind}")


@dataclass
class InsightReport:
    findings: list[Finding]
    narrative: str
    source_sql: str = ""

    def to_dict(self) -> dict:
        return {"findings": [f.to_dict() for f in self.findings],
                "narrative": self.narrative, "source_sql": self.source_sql}

    @classmethod
    def from_dict(cls, data: dict) -> "InsightReport":
        return cls(findings=[finding_from_dict(f) for f in data["findings"]],
                   narrative=data["narrative"], source_sql=data.get("source_sql", ""))


# --- detectors ---------------------------------------------------------------

def detect_trend(y: Sequence[float], x: Optional[Sequence[float]] = None,
                 r2_threshold: float = 0.5, field_name: str = "",
                 per_day: bool = False) -> Optional[TrendFinding]:
    """Least-squares line over the series; emitted only when it explains at
    least ``r2_threshold`` of the variance and is not flat."""
    n = len(y)
    if n < 3:
        return None
    xs = list(x) if x is not None else list(range(n))
    if len(xs) != n or any(not math.isfinite(float(v)) for v in y):
        return None
    mean_x = sum(xs) / n
    mean_y = sum(y) / n
    var_x = sum((v - mean_x) ** 2 for v in xs)
    if var_x == 0:
        return None
    cov = sum((a - mean_x) * (b - mean_y) for a, b in zip(xs, y))
    slope = cov / var_x
    intercept = mean_y - slope * mean_x
    ss_tot = sum((v - mean_y) ** 2 for v in y)
    if ss_tot == 0 or slope == 0:
        return None
    ss_res = sum((b - (intercept + slope * a)) ** 2 for a, b in zip(xs, y))
    r2 = 1.0 - ss_res / ss_tot
    if r2 < r2_threshold:
        return None
    return TrendFinding(field=field_name, slope=slope, intercept=intercept, r2=r2,
                        direction="increasing" if slope > 0 else "decreasing",
                        per_day=per_day)


def detect_anomalies(y: Sequence[float], score_threshold: float = 3.5,
                     field_name: str = "") -> list[AnomalyFinding]:
    """Modified z-score outliers; a zero MAD flags every off-median point."""
    n = len(y)
    if n < 4:
        return []
    med = _median(y)
    deviations = [abs(v - med) for v in y]
    mad = _median(deviations)
    findings = []
    if mad == 0:
        for idx, value in enumerate(y):
            if value != med:
                findings.append(AnomalyFinding(field=field_name, row_index=idx,
                                               value=float(value), score=DEGENERATE_SCORE,
                                               rule="mad_degenerate"))
        return findings
    for idx, value in enumerate(y):
        score = MODIFIED_Z_FACTOR * (value - med) / mad
        if abs(score) > score_threshold:
            findings.append(AnomalyFinding(field=field_name, row_index=idx,
                                           value=float(value), score=score, rule="mad"))
    return findings


def detect_correlations(table: ResultTable,
                        r_threshold: float = 0.7) -> list[CorrelationFinding]:
    """Pearson r over every quantitative pair; zero-variance columns skipped."""
    names = [name for name, kind in table.columns if kind == SemanticType.QUANTITATIVE]
    findings = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            xs_raw = table.column_values(names[i])
            ys_raw = table.column_values(names[j])
            pairs = [
                (float(a), float(b)) for a, b in zip(xs_raw, ys_raw)
                if a is not None and b is not None
                and math.isfinite(float(a)) and math.isfinite(float(b))
            ]
            if len(pairs) < 3:
                continue
            r = _pearson(pairs)
            if r is None or abs(r) < r_threshold:
                continue
            field_a, field_b = sorted((names[i], names[j]))
            findings.append(CorrelationFinding(field_a=field_a, field_b=field_b,
                                               r=r, n=len(pairs)))
    findings.sort(key=lambda f: (-abs(f.r), f.field_a, f.field_b))
    return findings


def _median(values: Sequence[float]) -> float:
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    if n % 2:
        return float(ordered[mid])
    return (ordered[mid - 1] + ordered[mid]) / 2.0


def _pearson(pairs: list[tuple[float, float]]) -> Optional[float]:
    n = len(pairs)
    mean_x = sum(p[0] for p in pairs) / n
    mean_y = sum(p[1] for p in pairs) / n
    var_x = sum((p[0] - mean_x) ** 2 for p in pairs)
    var_y = sum((p[1] - mean_y) ** 2 for p in pairs)
    if var_x == 0 or var_y == 0:
        return None
    cov = sum((p[0] - mean_x) * (p[1] - mean_y) for p in pairs)
    return cov / math.sqrt(var_x * var_y)


# --- report assembly ------------------------------------------------------------

def generate_insights(table: ResultTable, question: str = "",
                      providers: Optional[Providers] = None,
                      r2_threshold: float = 0.5, score_threshold: float = 3.5,
                      r_threshold: float = 0.7) -> InsightReport:
    """Run all detectors over the table and compose the narrative.

    Series are ordered by the first temporal column when one exists, else row
    order; trends over temporal series report slope per day.
    """
    quantitative = [n for n, k in table.columns if k == SemanticType.QUANTITATIVE]
    if not quantitative:
        raise NothingToAnalyze("no quantitative column to analyze")

    temporal = next((n for n, k in table.columns if k == SemanticType.TEMPORAL), None)
    rows = list(table.rows)
    x_days: Optional[list[float]] = None
    if temporal is not None:
        t_idx = table.column_names.index(temporal)
        keyed = [(parse_temporal(row[t_idx]), row) for row in rows]
        keyed = [(t, row) for t, row in keyed if t is not None]
        keyed.sort(key=lambda kv: kv[0])
        rows = [row for _, row in keyed]
        if keyed:
            origin = keyed[0][0]
            x_days = [(t - origin).total_seconds() / 86400.0 for t, _ in keyed]

    trends: list[TrendFinding] = []
    anomalies: list[AnomalyFinding] = []
    for name in quantitative:
        idx = table.column_names.index(name)
        series = [row[idx] for row in rows]
        clean = [(i, float(v)) for i, v in enumerate(series)
                 if v is not None and math.isfinite(float(v))]
        values = [v for _, v in clean]
        if not values:
            continue
        xs = [x_days[i] for i, _ in clean] if x_days is not None else None
        finding = detect_trend(values, x=xs, r2_threshold=r2_threshold,
                               field_name=name, per_day=x_days is not None)
        if finding is not None:
            trends.append(finding)
        for anomaly in detect_anomalies(values, score_threshold=score_threshold,
                                        field_name=name):
            anomaly.row_index = clean[anomaly.row_index][0]
            anomalies.append(anomaly)

    anomalies.sort(key=lambda f: (-abs(f.score), f.field, f.row_index))
    ordered_table = ResultTable(columns=table.columns, rows=rows,
                                truncated=table.truncated, source_sql=table.source_sql)
    correlations = detect_correlations(ordered_table, r_threshold=r_threshold)

    findings: list[Finding] = [*trends, *anomalies, *correlations]
    narrative = render_narrative(findings)
    report = InsightReport(findings=findings, narrative=narrative,
                           source_sql=table.source_sql)
    if providers is not None and providers.model is not None and findings:
        report.narrative = _maybe_rephrase(report, question, providers)
    return report


def render_narrative(findings: list[Finding]) -> str:
    if not findings:
        return "No notable trends, anomalies or correlations were detected."
    sentences = [_sentence(f) for f in findings]
    return " ".join(sentences)


def _sentence(finding: Finding) -> str:
    if isinstance(finding, TrendFinding):
        unit = "per day" if finding.per_day else "per step"
        return (f"{finding.field} shows an {finding.direction} trend "
                f"(slope {finding.slope:.4g} {unit}, R²={finding.r2:.3f}).")
    if isinstance(finding, AnomalyFinding):
        if finding.rule == "mad_degenerate":
            return (f"{finding.field} deviates from an otherwise constant series "
                    f"at position {finding.row_index} (value {finding.value:g}).")
        return (f"{finding.field} has an unusual value {finding.value:g} "
                f"at position {finding.row_index} (modified z-score {finding.score:.2f}).")
    return (f"{finding.field_a} and {finding.field_b} are strongly correlated "
            f"(r={finding.r:.3f}, n={finding.n}).")


def _maybe_rephrase(report: InsightReport, question: str, providers: Providers) -> str:
    context = (f"question: {question}\nfindings narrative: {report.narrative}\n"
               "Rephrase the narrative for a business reader; mention every finding once.")
    request = prompt("insight_narrate", context, ("narrative", "string", True))
    try:
        value = complete_structured(request, providers.model, clock=providers.clock)
    except DataChatError:
        return report.narrative
    candidate = value["narrative"]
    mentioned = all(_mention(f) in candidate.lower() for f in report.findings)
    return candidate if candidate and mentioned else report.narrative


def _mention(finding: Finding) -> str:
    if isinstance(finding, CorrelationFinding):
        return finding.field_a.lower()
    return finding.field.lower()
