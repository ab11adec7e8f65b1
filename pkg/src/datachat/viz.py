"""Visualization agent: cleaning, profiling, chart-type ranking, spec building.

The ranking matrix encodes standard practice (temporal series -> line,
low-cardinality category -> bar, two measures -> scatter, single measure ->
histogram, two dimensions + measure -> heatmap, pie only for tiny category
sets) and lives in data so it can be tuned without touching the scorer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Optional

from .canonical import short_digest
from .errors import ChannelUnsatisfiable, EmptyAfterCleaning, NotPlottable
from .tabular import ResultTable, SemanticType, parse_temporal


class ChartType(str, Enum):
    BAR = "bar"
    LINE = "line"
    AREA = "area"
    SCATTER = "scatter"
    HISTOGRAM = "histogram"
    HEATMAP = "heatmap"
    PIE = "pie"


CHART_ORDER = {c: i for i, c in enumerate(ChartType)}

CATEGORICAL_PLOT_CAP = 20
PIE_CARDINALITY_CAP = 6
BAR_CARDINALITY_CAP = 50

AGGREGATES = ("none", "sum", "avg", "count", "min", "max")
PALETTES = ("default", "muted", "pastel", "bright", "dark", "colorblind")


@dataclass
class ColumnProfile:
    name: str
    semantic_type: SemanticType
    cardinality: int
    null_fraction: float
    min_value: Optional[object] = None
    max_value: Optional[object] = None
    monotonic: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "semantic_type": self.semantic_type.value,
            "cardinality": self.cardinality,
            "null_fraction": self.null_fraction,
            "min_value": self.min_value,
            "max_value": self.max_value,
            "monotonic": self.monotonic,
        }


@dataclass
class PreprocessResult:
    table: ResultTable
    profiles: list[ColumnProfile]
    dropped_rows: int


@dataclass
class RankedChartTypes:
    entries: list[tuple[ChartType, float, str]]

    def top(self) -> ChartType:
        return self.entries[0][0]

    def score_of(self, chart: ChartType) -> Optional[float]:
        for entry, score, _ in self.entries:
            if entry == chart:
                return score
        return None

    def to_dict(self) -> dict:
        return {"entries": [[c.value, s, r] for c, s, r in self.entries]}


@dataclass
class Encoding:
    field: str
    semantic_type: SemanticType
    aggregate: str = "none"
    bin: Optional[int] = None
    sort: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "field": self.field,
            "semantic_type": self.semantic_type.value,
            "aggregate": self.aggregate,
            "bin": self.bin,
            "sort": self.sort,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Encoding":
        return cls(
            field=data["field"],
            semantic_type=SemanticType(data["semantic_type"]),
            aggregate=data.get("aggregate", "none"),
            bin=data.get("bin"),
            sort=data.get("sort"),
        )


@dataclass
class ChartStyle:
    palette: str = "default"
    mark_color: Optional[str] = None
    x_label: Optional[str] = None
    y_label: Optional[str] = None

    def to_dict(self) -> dict:
        return {"palette": self.palette, "mark_color": self.mark_color,
                "x_label": self.x_label, "y_label": self.y_label}

    @classmethod
    def from_dict(cls, data: dict) -> "ChartStyle":
        return cls(palette=data.get("palette", "default"), mark_color=data.get("mark_color"),
                   x_label=data.get("x_label"), y_label=data.get("y_label"))


@dataclass
class ChartSpec:
    chart_id: str
    mark: ChartType
    encodings: dict[str, Encoding]
    title: str
    style: ChartStyle
    data: dict
    source_sql: str
    revision: int = 0

    def to_dict(self) -> dict:
        return {
            "chart_id": self.chart_id,
            "mark": self.mark.value,
            "encodings": {ch: e.to_dict() for ch, e in self.encodings.items()},
            "title": self.title,
            "style": self.style.to_dict(),
            "data": self.data,
            "source_sql": self.source_sql,
            "revision": self.revision,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChartSpec":
        return cls(
            chart_id=data["chart_id"],
            mark=ChartType(data["mark"]),
            encodings={ch: Encoding.from_dict(e) for ch, e in data["encodings"].items()},
            title=data["title"],
            style=ChartStyle.from_dict(data["style"]),
            data=data["data"],
            source_sql=data["source_sql"],
            revision=int(data.get("revision", 0)),
        )


# --- spec validity -------------------------------------------------------------

CHANNELS = ("x", "y", "color", "size", "row_facet")

_REQUIRED_CHANNELS = {
    ChartType.BAR: ("x", "y"),
    ChartType.LINE: ("x", "y"),
    ChartType.AREA: ("x", "y"),
    ChartType.SCATTER: ("x", "y"),
    ChartType.HISTOGRAM: ("x",),
    ChartType.HEATMAP: ("x", "y", "color"),
    ChartType.PIE: ("x", "y"),
}


def spec_problems(spec: ChartSpec) -> list[str]:
    """Invariant self-check; empty list means the spec is well-formed."""
    problems = []
    fields = spec.data.get("fields", [])
    for channel, enc in spec.encodings.items():
        if channel not in CHANNELS:
            problems.append(f"unknown channel {channel!r}")
        if enc.field not in fields:
            problems.append(f"channel {channel} encodes missing field {enc.field!r}")
        if enc.aggregate not in AGGREGATES:
            problems.append(f"channel {channel} has bad aggregate {enc.aggregate!r}")
    for channel in _REQUIRED_CHANNELS[spec.mark]:
        if channel not in spec.encodings:
            problems.append(f"{spec.mark.value} requires channel {channel}")
    if spec.mark == ChartType.HISTOGRAM and "y" in spec.encodings:
        problems.append("histogram takes no y channel")
    if spec.mark == ChartType.SCATTER:
        for channel in ("x", "y"):
            enc = spec.encodings.get(channel)
            if enc is not None and enc.semantic_type != SemanticType.QUANTITATIVE:
                problems.append(f"scatter {channel} must be quantitative")
    if spec.style.mark_color is not None and not is_color_token(spec.style.mark_color):
        problems.append(f"bad color token {spec.style.mark_color!r}")
    for name in fields:
        if name not in spec.data.get("values", {}):
            problems.append(f"data block missing values for {name!r}")
    return problems


# CSS named colors (the full CSS Color Module level 4 named set).
CSS_COLORS = frozenset("""
aliceblue antiquewhite aqua aquamarine azure beige bisque black blanchedalmond
blue blueviolet brown burlywood cadetblue chartreuse chocolate coral
cornflowerblue cornsilk crimson cyan darkblue darkcyan darkgoldenrod darkgray
darkgreen darkgrey darkkhaki darkmagenta darkolivegreen darkorange darkorchid
darkred darksalmon darkseagreen darkslateblue darkslategray darkslategrey
darkturquoise darkviolet deeppink deepskyblue dimgray dimgrey dodgerblue
firebrick floralwhite forestgreen fuchsia gainsboro ghostwhite gold goldenrod
gray green greenyellow grey honeydew hotpink indianred indigo ivory khaki
lavender lavenderblush lawngreen lemonchiffon lightblue lightcoral lightcyan
lightgoldenrodyellow lightgray lightgreen lightgrey lightpink lightsalmon
lightseagreen lightskyblue lightslategray lightslategrey lightsteelblue
lightyellow lime limegreen linen magenta maroon mediumaquamarine mediumblue
mediumorchid mediumpurple mediumseagreen mediumslateblue mediumspringgreen
mediumturquoise mediumvioletred midnightblue mintcream mistyrose moccasin
navajowhite navy oldlace olive olivedrab orange orangered orchid
palegoldenrod palegreen paleturquoise palevioletred papayawhip peachpuff peru
pink plum powderblue purple rebeccapurple red rosybrown royalblue saddlebrown
salmon sandybrown seagreen seashell sienna silver skyblue slateblue slategray
slategrey snow springgreen steelblue tan teal thistle tomato turquoise violet
wheat white whitesmoke yellow yellowgreen
""".split())


def is_color_token(token: str) -> bool:
    if token.lower() in CSS_COLORS:
        return True
    if len(token) == 7 and token[0] == "#":
        return all(c in "0123456789abcdefABCDEF" for c in token[1:])
    return False


# --- preprocessing ---------------------------------------------------------------

def preprocess(table: ResultTable, categorical_cap: int = CATEGORICAL_PLOT_CAP) -> PreprocessResult:
    """Drop null rows, promote ISO-date text to temporal, cap category counts.

    Null fractions are measured on the incoming table; every other profile
    statistic is computed on the cleaned one.
    """
    if not table.columns:
        raise ValueError("table must have at least one column")
    names = table.column_names
    total = len(table.rows)
    null_fractions = {}
    for idx, name in enumerate(names):
        nulls = sum(1 for row in table.rows if row[idx] is None)
        null_fractions[name] = (nulls / total) if total else 0.0

    kept = [row for row in table.rows if all(v is not None for v in row)]
    dropped = total - len(kept)
    if not kept:
        raise EmptyAfterCleaning(f"all {total} rows contained nulls")

    columns = list(table.columns)
    for idx, (name, kind) in enumerate(columns):
        if kind != SemanticType.UNKNOWN:
            continue
        values = [row[idx] for row in kept]
        parsed = sum(1 for v in values if parse_temporal(v) is not None)
        if parsed / len(values) >= 0.95:
            columns[idx] = (name, SemanticType.TEMPORAL)

    for idx, (name, kind) in enumerate(columns):
        if kind != SemanticType.CATEGORICAL:
            continue
        values = [row[idx] for row in kept]
        distinct = set(values)
        if len(distinct) <= categorical_cap:
            continue
        counts: dict = {}
        for v in values:
            counts[v] = counts.get(v, 0) + 1
        top = sorted(counts.items(), key=lambda kv: (-kv[1], str(kv[0])))
        keep_set = {v for v, _ in top[: categorical_cap - 1]}
        kept = [
            tuple(("Other" if (j == idx and row[j] not in keep_set) else row[j])
                  for j in range(len(row)))
            for row in kept
        ]

    cleaned = ResultTable(columns=columns, rows=kept, truncated=table.truncated,
                          source_sql=table.source_sql)
    profiles = [
        _profile(cleaned, idx, null_fractions[name])
        for idx, (name, _) in enumerate(columns)
    ]
    return PreprocessResult(table=cleaned, profiles=profiles, dropped_rows=dropped)


def _profile(table: ResultTable, idx: int, null_fraction: float) -> ColumnProfile:
    name, kind = table.columns[idx]
    values = [row[idx] for row in table.rows]
    profile = ColumnProfile(
        name=name,
        semantic_type=kind,
        cardinality=len(set(values)),
        null_fraction=null_fraction,
    )
    if kind in (SemanticType.QUANTITATIVE, SemanticType.TEMPORAL) and values:
        try:
            ordered = sorted(values)
            profile.min_value, profile.max_value = ordered[0], ordered[-1]
        except TypeError:
            pass
        non_dec = all(b >= a for a, b in zip(values, values[1:]))
        non_inc = all(b <= a for a, b in zip(values, values[1:]))
        profile.monotonic = non_dec or non_inc
    return profile


# --- ranking ------------------------------------------------------------------------

def _matrix_scores(subset: tuple[ColumnProfile, ...]) -> list[tuple[ChartType, float, str]]:
    """Score one exact combination of profiles against the fixed matrix."""
    kinds = sorted(p.semantic_type.value for p in subset)
    quantitative = [p for p in subset if p.semantic_type == SemanticType.QUANTITATIVE]
    categorical = [p for p in subset if p.semantic_type == SemanticType.CATEGORICAL]

    if kinds == ["quantitative", "temporal"]:
        return [
            (ChartType.LINE, 1.0, "one temporal and one quantitative field"),
            (ChartType.AREA, 0.8, "temporal series, cumulative reading"),
            (ChartType.BAR, 0.6, "temporal values as discrete bars"),
        ]
    if kinds == ["categorical", "quantitative"]:
        card = categorical[0].cardinality
        if card <= CATEGORICAL_PLOT_CAP:
            entries = [(ChartType.BAR, 1.0, f"{card} categories against one measure")]
            if card <= PIE_CARDINALITY_CAP:
                entries.append((ChartType.PIE, 0.5, f"share of whole across {card} categories"))
            return entries
        if card <= BAR_CARDINALITY_CAP:
            return [(ChartType.BAR, 0.6, f"many ({card}) categories against one measure")]
        return []
    if kinds == ["quantitative", "quantitative"]:
        return [(ChartType.SCATTER, 1.0, "two quantitative fields")]
    if kinds == ["quantitative"]:
        return [(ChartType.HISTOGRAM, 1.0, "distribution of one quantitative field")]
    if len(kinds) == 3 and kinds.count("quantitative") == 1 and all(
        k in ("categorical", "temporal") for k in kinds if k != "quantitative"
    ):
        return [(ChartType.HEATMAP, 1.0, "two dimensions against one measure")]
    return []


def rank_charts(profiles: list[ColumnProfile],
                explicit_request: Optional[ChartType] = None) -> RankedChartTypes:
    """Rank applicable chart types for the profiled columns.

    The complete profile set is matched against the matrix first; when no row
    applies, the best rule over every field subset (size <= 3) wins. A
    satisfiable explicit user request is promoted to the top.
    """
    if not profiles:
        raise ValueError("at least one profile required")
    plottable = sorted(
        (p for p in profiles if p.semantic_type in
         (SemanticType.QUANTITATIVE, SemanticType.CATEGORICAL, SemanticType.TEMPORAL)),
        key=lambda p: (p.semantic_type.value, p.name),
    )

    entries = _matrix_scores(tuple(plottable))
    if not entries:
        best: dict[ChartType, tuple[float, str]] = {}
        for size in range(1, min(3, len(plottable)) + 1):
            for subset in combinations(plottable, size):
                for chart, score, reason in _matrix_scores(subset):
                    if chart not in best or score > best[chart][0]:
                        best[chart] = (score, reason)
        entries = [(chart, score, reason) for chart, (score, reason) in best.items()]

    entries.sort(key=lambda e: (-e[1], CHART_ORDER[e[0]]))

    if explicit_request is not None and _mark_satisfiable(plottable, explicit_request):
        entries = [e for e in entries if e[0] != explicit_request]
        entries.insert(0, (explicit_request, 1.0, "user-requested"))

    if not entries:
        raise NotPlottable("no chart rule applies to these columns")
    return RankedChartTypes(entries=entries)


def _mark_satisfiable(plottable: list[ColumnProfile], mark: ChartType) -> bool:
    for size in range(1, min(3, len(plottable)) + 1):
        for subset in combinations(plottable, size):
            if any(chart == mark for chart, _, _ in _matrix_scores(subset)):
                return True
    return False


# --- spec building ------------------------------------------------------------------

def build_chart_spec(chart_type: ChartType, profiles: list[ColumnProfile],
                     table: ResultTable, question: str = "") -> ChartSpec:
    """Assemble a declarative spec for the chosen mark.

    Channel assignment: x takes the temporal field, else a categorical one,
    else the first quantitative; y takes the first remaining quantitative and
    is sum-aggregated when x values repeat. Heatmaps take both dimensions plus
    the measure on color; multi-series lines take a categorical color.
    """
    by_kind = {
        SemanticType.TEMPORAL: [p for p in profiles if p.semantic_type == SemanticType.TEMPORAL],
        SemanticType.CATEGORICAL: [p for p in profiles if p.semantic_type == SemanticType.CATEGORICAL],
        SemanticType.QUANTITATIVE: [p for p in profiles if p.semantic_type == SemanticType.QUANTITATIVE],
    }
    temporal = by_kind[SemanticType.TEMPORAL]
    categorical = by_kind[SemanticType.CATEGORICAL]
    quantitative = by_kind[SemanticType.QUANTITATIVE]

    encodings: dict[str, Encoding] = {}

    if chart_type == ChartType.HISTOGRAM:
        if not quantitative:
            raise ChannelUnsatisfiable("histogram needs a quantitative field")
        target = quantitative[0]
        values = [v for v in table.column_values(target.name) if v is not None]
        encodings["x"] = Encoding(field=target.name, semantic_type=target.semantic_type,
                                  bin=freedman_diaconis_bins(values))
        title = f"{target.name} distribution".title()
        data = _data_block(table, [target.name])
    elif chart_type == ChartType.HEATMAP:
        dims = temporal + categorical
        if len(dims) < 2 or not quantitative:
            raise ChannelUnsatisfiable("heatmap needs two dimension fields and a measure")
        x_p, y_p, measure = dims[0], dims[1], quantitative[0]
        aggregate = _needs_aggregation(table, [x_p.name, y_p.name])
        encodings["x"] = Encoding(field=x_p.name, semantic_type=x_p.semantic_type)
        encodings["y"] = Encoding(field=y_p.name, semantic_type=y_p.semantic_type)
        encodings["color"] = Encoding(field=measure.name, semantic_type=measure.semantic_type,
                                      aggregate="sum" if aggregate else "none")
        title = f"{measure.name} by {x_p.name} and {y_p.name}".title()
        data = _materialize(table, [x_p.name, y_p.name], measure.name,
                            "sum" if aggregate else "none")
    elif chart_type == ChartType.SCATTER:
        if len(quantitative) < 2:
            raise ChannelUnsatisfiable("scatter needs two quantitative fields")
        x_p, y_p = quantitative[0], quantitative[1]
        encodings["x"] = Encoding(field=x_p.name, semantic_type=x_p.semantic_type)
        encodings["y"] = Encoding(field=y_p.name, semantic_type=y_p.semantic_type)
        title = f"{y_p.name} by {x_p.name}".title()
        data = _data_block(table, [x_p.name, y_p.name])
    else:  # bar, line, area, pie
        if chart_type == ChartType.PIE:
            x_p = categorical[0] if categorical else None
        else:
            x_p = temporal[0] if temporal else (categorical[0] if categorical else None)
        remaining = [p for p in quantitative if x_p is None or p.name != x_p.name]
        if x_p is None and quantitative:
            x_p, remaining = quantitative[0], quantitative[1:]
        if x_p is None or not remaining:
            raise ChannelUnsatisfiable(f"{chart_type.value} needs a dimension and a measure")
        y_p = remaining[0]
        color_p = None
        if chart_type == ChartType.LINE and x_p.semantic_type == SemanticType.TEMPORAL and categorical:
            color_p = categorical[0]
        group_fields = [x_p.name] + ([color_p.name] if color_p else [])
        aggregate = (
            x_p.semantic_type in (SemanticType.TEMPORAL, SemanticType.CATEGORICAL)
            and _needs_aggregation(table, group_fields)
        )
        encodings["x"] = Encoding(field=x_p.name, semantic_type=x_p.semantic_type)
        encodings["y"] = Encoding(field=y_p.name, semantic_type=y_p.semantic_type,
                                  aggregate="sum" if aggregate else "none")
        if color_p is not None:
            encodings["color"] = Encoding(field=color_p.name, semantic_type=color_p.semantic_type)
        title = f"{y_p.name} by {x_p.name}".title()
        data = _materialize(table, group_fields, y_p.name, "sum" if aggregate else "none")

    chart_id = "c" + short_digest({
        "sql": table.source_sql,
        "mark": chart_type.value,
        "encodings": {ch: e.to_dict() for ch, e in encodings.items()},
    })
    style = ChartStyle(x_label=encodings["x"].field if "x" in encodings else None,
                       y_label=encodings["y"].field if "y" in encodings else None)
    return ChartSpec(chart_id=chart_id, mark=chart_type, encodings=encodings,
                     title=title, style=style, data=data, source_sql=table.source_sql)


def _needs_aggregation(table: ResultTable, group_fields: list[str]) -> bool:
    seen = set()
    for key in zip(*(table.column_values(f) for f in group_fields)):
        if key in seen:
            return True
        seen.add(key)
    return False


def _data_block(table: ResultTable, fields: list[str]) -> dict:
    return {"fields": fields, "values": {f: table.column_values(f) for f in fields}}


def _materialize(table: ResultTable, group_fields: list[str], measure: str,
                 aggregate: str) -> dict:
    if aggregate == "none":
        return _data_block(table, group_fields + [measure])
    sums: dict[tuple, float] = {}
    order: list[tuple] = []
    for key, value in zip(zip(*(table.column_values(f) for f in group_fields)),
                          table.column_values(measure)):
        if key not in sums:
            sums[key] = 0.0
            order.append(key)
        if value is not None:
            sums[key] += value
    values: dict[str, list] = {f: [] for f in group_fields}
    values[measure] = []
    for key in order:
        for f, part in zip(group_fields, key):
            values[f].append(part)
        values[measure].append(sums[key])
    return {"fields": group_fields + [measure], "values": values}


def freedman_diaconis_bins(values: list, lo: int = 5, hi: int = 50) -> int:
    """Freedman-Diaconis bin count clamped to [lo, hi]."""
    n = len(values)
    if n < 2:
        return lo
    ordered = sorted(float(v) for v in values)
    iqr = _percentile(ordered, 75.0) - _percentile(ordered, 25.0)
    span = ordered[-1] - ordered[0]
    if iqr <= 0 or span <= 0:
        return lo
    width = 2.0 * iqr / (n ** (1.0 / 3.0))
    return max(lo, min(hi, math.ceil(span / width)))


def _percentile(ordered: list[float], pct: float) -> float:
    # linear interpolation between closest ranks, matching numpy's default
    if len(ordered) == 1:
        return ordered[0]
    rank = (pct / 100.0) * (len(ordered) - 1)
    lower = math.floor(rank)
    upper = math.ceil(rank)
    if lower == upper:
        return ordered[lower]
    frac = rank - lower
    return ordered[lower] * (1 - frac) + ordered[upper] * frac
