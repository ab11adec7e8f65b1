"""Conversational chart customization: command -> validated patch -> new spec.

Patches are restricted to an allowlist of spec paths so neither the rule
lexicon nor a model can produce an invalid chart. Application is atomic: the
stored spec is never touched unless every op validates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import BadValue, DataChatError, Unparseable
from .providers.core import Providers, complete_structured, prompt
from .tabular import ResultTable, SemanticType
from .viz import (
    AGGREGATES,
    PALETTES,
    ChartSpec,
    ChartType,
    ColumnProfile,
    Encoding,
    _mark_satisfiable,
    build_chart_spec,
    is_color_token,
    rank_charts,
)

ALLOWED_SIMPLE_PATHS = frozenset({
    "mark", "title", "style.mark_color", "style.palette",
    "style.x_label", "style.y_label",
})

_ENCODING_PATH = re.compile(r"^encodings\.(x|y|color|size|row_facet)\.(sort|aggregate|field)$")

_CHART_WORDS = "|".join(c.value for c in ChartType)

_COLOR_RE = re.compile(r"colou?r\b[^.]*?\bto\s+(?:be\s+)?([#\w]+)", re.IGNORECASE)
_MARK_RE = re.compile(
    rf"(?:make it an?|switch to an?|switch to|turn it into an?)\s+({_CHART_WORDS})\b",
    re.IGNORECASE)
_TITLE_RE = re.compile(r"(?:title it|retitle (?:it )?(?:to|as)|rename (?:it )?to)\s+(.+)",
                       re.IGNORECASE)
_SORT_RE = re.compile(r"sort(?: it)? by (\w+)(?:\s+(asc|ascending|desc|descending))?",
                      re.IGNORECASE)
_AGG_RE = re.compile(r"\buse (?:the )?(average|mean|avg|sum|count|min|max)\b", re.IGNORECASE)


@dataclass
class PatchOp:
    op: str            # set | remove
    path: str
    value: Optional[object] = None

    def to_dict(self) -> dict:
        return {"op": self.op, "path": self.path, "value": self.value}

    @classmethod
    def from_dict(cls, data: dict) -> "PatchOp":
        return cls(op=data["op"], path=data["path"], value=data.get("value"))


@dataclass
class ChartPatch:
    target_chart: str
    ops: list[PatchOp]

    def to_dict(self) -> dict:
        return {"target_chart": self.target_chart, "ops": [o.to_dict() for o in self.ops]}

    @classmethod
    def from_dict(cls, data: dict) -> "ChartPatch":
        return cls(target_chart=data["target_chart"],
                   ops=[PatchOp.from_dict(o) for o in data["ops"]])


@dataclass
class PatchValidation:
    ok: bool
    errors: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    reassignments: list[PatchOp] = field(default_factory=list)


def parse_customization(command: str, chart: ChartSpec,
                        providers: Optional[Providers] = None) -> ChartPatch:
    """Map a natural-language command onto patch ops.

    The rule lexicon handles colors, mark switches, titles, sorting and
    aggregates; anything else goes to the model adapter, still constrained to
    the allowlist. No rule and no model answer -> Unparseable.
    """
    ops: list[PatchOp] = []
    match = _COLOR_RE.search(command)
    if match:
        ops.append(PatchOp("set", "style.mark_color", match.group(1)))
    match = _MARK_RE.search(command)
    if match:
        ops.append(PatchOp("set", "mark", match.group(1).lower()))
    match = _TITLE_RE.search(command)
    if match:
        ops.append(PatchOp("set", "title", match.group(1).strip().strip("\"'").strip()))
    match = _SORT_RE.search(command)
    if match:
        field_name, direction = match.group(1), (match.group(2) or "asc").lower()
        direction = "desc" if direction.startswith("desc") else "asc"
        if "x" in chart.encodings and chart.encodings["x"].field != field_name:
            ops.append(PatchOp("set", "encodings.x.field", field_name))
        ops.append(PatchOp("set", "encodings.x.sort", direction))
    match = _AGG_RE.search(command)
    if match:
        word = match.group(1).lower()
        agg = {"average": "avg", "mean": "avg"}.get(word, word)
        ops.append(PatchOp("set", "encodings.y.aggregate", agg))

    if ops:
        return ChartPatch(target_chart=chart.chart_id, ops=ops)

    model_ops = _model_parse(command, chart, providers)
    if model_ops:
        return ChartPatch(target_chart=chart.chart_id, ops=model_ops)
    raise Unparseable(f"no customization rule matches {command!r}")


def _model_parse(command: str, chart: ChartSpec,
                 providers: Optional[Providers]) -> list[PatchOp]:
    if providers is None or providers.model is None:
        return []
    context = (f"command: {command}\nchart mark: {chart.mark.value}\n"
               f"fields: {', '.join(chart.data.get('fields', []))}\n"
               "Emit ops [{op,path,value}] using only allowlisted spec paths.")
    request = prompt("customize_parse", context, ("ops", "array", True))
    try:
        value = complete_structured(request, providers.model, clock=providers.clock)
    except DataChatError:
        return []
    ops = []
    for entry in value["ops"]:
        if not isinstance(entry, dict):
            continue
        op = entry.get("op")
        path = entry.get("path", "")
        if op not in ("set", "remove") or not _path_allowed(path):
            continue
        ops.append(PatchOp(op=op, path=path, value=entry.get("value")))
    return ops


def _path_allowed(path: str) -> bool:
    return path in ALLOWED_SIMPLE_PATHS or bool(_ENCODING_PATH.match(path))


def profiles_from_spec(chart: ChartSpec) -> list[ColumnProfile]:
    """Reconstruct column profiles from the spec's inline data block."""
    fields = chart.data.get("fields", [])
    values = chart.data.get("values", {})
    kinds = {enc.field: enc.semantic_type for enc in chart.encodings.values()}
    profiles = []
    for name in fields:
        column = values.get(name, [])
        profiles.append(ColumnProfile(
            name=name,
            semantic_type=kinds.get(name, SemanticType.UNKNOWN),
            cardinality=len(set(column)),
            null_fraction=0.0,
        ))
    return profiles


def validate_patch(chart: ChartSpec, patch: ChartPatch) -> PatchValidation:
    """Check every op against the allowlist, value rules, and mark channel
    feasibility. Mark changes may trigger recorded channel reassignments."""
    result = PatchValidation(ok=True)
    if not patch.ops:
        result.ok = False
        result.errors.append(("BadValue", "patch has no ops"))
        return result
    for op in patch.ops:
        if op.op not in ("set", "remove"):
            result.ok = False
            result.errors.append(("BadValue", f"unknown op {op.op!r}"))
            continue
        if not _path_allowed(op.path):
            result.ok = False
            result.errors.append(("IllegalPath", f"path {op.path!r} is not patchable"))
            continue
        if op.op == "remove":
            if op.path in ("mark", "title"):
                result.ok = False
                result.errors.append(("BadValue", f"cannot remove {op.path}"))
            continue
        error = _check_set(chart, op, result)
        if error is not None:
            result.ok = False
            result.errors.append(error)
    return result


def _check_set(chart: ChartSpec, op: PatchOp,
               result: PatchValidation) -> Optional[tuple[str, str]]:
    value = op.value
    if op.path == "mark":
        try:
            mark = ChartType(str(value))
        except ValueError:
            return ("BadValue", f"unknown chart type {value!r}")
        profiles = profiles_from_spec(chart)
        if not _mark_satisfiable(profiles, mark):
            return ("IncompatibleMark",
                    f"{mark.value} cannot be drawn from this chart's fields")
        result.reassignments.extend(_plan_reassignment(chart, mark, profiles))
        score = rank_charts(profiles).score_of(mark)
        if score is None or score < 0.5:
            result.warnings.append(
                f"{mark.value} scores below 0.5 for this data; it may read poorly")
        return None
    if op.path == "title":
        if not isinstance(value, str) or not value.strip():
            return ("BadValue", "title must be a non-empty string")
        return None
    if op.path == "style.mark_color":
        if not isinstance(value, str) or not is_color_token(value):
            return ("BadValue", f"{value!r} is not a CSS color name or #RRGGBB")
        return None
    if op.path == "style.palette":
        if value not in PALETTES:
            return ("BadValue", f"palette must be one of {', '.join(PALETTES)}")
        return None
    if op.path in ("style.x_label", "style.y_label"):
        if not isinstance(value, str):
            return ("BadValue", f"{op.path} must be a string")
        return None
    match = _ENCODING_PATH.match(op.path)
    channel, attr = match.group(1), match.group(2)
    if attr == "sort":
        if value not in ("asc", "desc"):
            return ("BadValue", "sort must be asc or desc")
    elif attr == "aggregate":
        if value not in AGGREGATES:
            return ("BadValue", f"aggregate must be one of {', '.join(AGGREGATES)}")
    else:  # field
        if value not in chart.data.get("fields", []):
            return ("BadValue", f"field {value!r} is not in the chart data")
    if channel not in chart.encodings and attr != "field":
        return ("BadValue", f"channel {channel} is not encoded on this chart")
    return None


def _plan_reassignment(chart: ChartSpec, mark: ChartType,
                       profiles: list[ColumnProfile]) -> list[PatchOp]:
    """Ops that move existing channels around when the new mark needs it."""
    table = ResultTable(
        columns=[(p.name, p.semantic_type) for p in profiles],
        rows=list(zip(*(chart.data["values"][p.name] for p in profiles))) if profiles else [],
        source_sql=chart.source_sql,
    )
    rebuilt = build_chart_spec(mark, profiles, table)
    ops: list[PatchOp] = []
    for channel, enc in rebuilt.encodings.items():
        current = chart.encodings.get(channel)
        if current is None or current.field != enc.field:
            ops.append(PatchOp("set", f"encodings.{channel}.field", enc.field))
        if current is None or current.aggregate != enc.aggregate:
            ops.append(PatchOp("set", f"encodings.{channel}.aggregate", enc.aggregate))
        if (current.bin if current else None) != enc.bin and enc.bin is not None:
            ops.append(PatchOp("set", f"encodings.{channel}.bin", enc.bin))
    for channel in chart.encodings:
        if channel not in rebuilt.encodings:
            ops.append(PatchOp("remove", f"encodings.{channel}", None))
    return ops


def apply_patch(chart: ChartSpec, patch: ChartPatch,
                validation: Optional[PatchValidation] = None) -> ChartSpec:
    """Return a new spec with all ops applied; the input spec is untouched."""
    if validation is None:
        validation = validate_patch(chart, patch)
    if not validation.ok:
        codes = ", ".join(code for code, _ in validation.errors)
        raise BadValue(f"patch failed validation: {codes}")
    spec = ChartSpec.from_dict(chart.to_dict())
    for op in patch.ops:
        _apply_op(spec, op)
        if op.path == "mark":
            for extra in validation.reassignments:
                _apply_op(spec, extra)
    spec.revision = chart.revision + 1
    return spec


def _apply_op(spec: ChartSpec, op: PatchOp) -> None:
    if op.path == "mark":
        spec.mark = ChartType(str(op.value))
        return
    if op.path == "title":
        spec.title = str(op.value)
        return
    if op.path.startswith("style."):
        attr = op.path.split(".", 1)[1]
        setattr(spec.style, attr, None if op.op == "remove" else op.value)
        return
    parts = op.path.split(".")
    channel = parts[1]
    if len(parts) == 2 and op.op == "remove":
        spec.encodings.pop(channel, None)
        return
    attr = parts[2]
    enc = spec.encodings.get(channel)
    if enc is None:
        field_name = str(op.value) if attr == "field" else spec.data["fields"][0]
        kind = next((e.semantic_type for e in spec.encodings.values()
                     if e.field == field_name), SemanticType.UNKNOWN)
        enc = Encoding(field=field_name, semantic_type=kind)
        spec.encodings[channel] = enc
    if op.op == "remove":
        setattr(enc, attr, None if attr != "aggregate" else "none")
        return
    if attr == "field":
        enc.field = str(op.value)
        for e_field, e_kind in _spec_field_kinds(spec).items():
            if e_field == enc.field:
                enc.semantic_type = e_kind
    elif attr == "aggregate":
        enc.aggregate = str(op.value)
    elif attr == "bin":
        enc.bin = int(op.value)
    else:
        enc.sort = str(op.value)


def _spec_field_kinds(spec: ChartSpec) -> dict[str, SemanticType]:
    kinds: dict[str, SemanticType] = {}
    for enc in spec.encodings.values():
        kinds.setdefault(enc.field, enc.semantic_type)
    return kinds
