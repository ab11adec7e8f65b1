"""Customizer: command parsing, patch validation, atomic application."""

import pytest

from datachat.errors import BadValue, Unparseable
from datachat.customize import (
    ChartPatch,
    PatchOp,
    apply_patch,
    parse_customization,
    validate_patch,
)
from datachat.providers.core import Providers
from datachat.providers.stubs import StubClock, StubModelAdapter
from datachat.tabular import ResultTable, SemanticType
from datachat.viz import ChartType, build_chart_spec, preprocess


def bar_chart(rows=None):
    rows = rows or [(f"2024-{m:02d}-01", m * 10.0) for m in range(1, 13)]
    table = ResultTable(
        columns=[("month", SemanticType.TEMPORAL), ("amount", SemanticType.QUANTITATIVE)],
        rows=rows, source_sql="SELECT month, amount FROM sales")
    pre = preprocess(table)
    return build_chart_spec(ChartType.BAR, pre.profiles, pre.table)


def test_blue_command_parses_to_color_op():
    chart = bar_chart()
    patch = parse_customization("Change the color of this chart to blue", chart)
    assert [op.to_dict() for op in patch.ops] == [
        {"op": "set", "path": "style.mark_color", "value": "blue"}]
    assert patch.target_chart == chart.chart_id


def test_make_it_a_line_chart():
    patch = parse_customization("make it a line chart", bar_chart())
    assert patch.ops[0].path == "mark"
    assert patch.ops[0].value == "line"


def test_switch_to_area():
    patch = parse_customization("switch to an area chart", bar_chart())
    assert patch.ops[0].value == "area"


def test_title_and_rename():
    patch = parse_customization('title it "Monthly totals"', bar_chart())
    assert patch.ops[0].path == "title" and patch.ops[0].value == "Monthly totals"
    patch = parse_customization("rename to Sales overview", bar_chart())
    assert patch.ops[0].value == "Sales overview"


def test_sort_and_aggregate_rules():
    patch = parse_customization("sort by month desc", bar_chart())
    assert {"op": "set", "path": "encodings.x.sort", "value": "desc"} in [
        op.to_dict() for op in patch.ops]
    patch = parse_customization("use average instead", bar_chart())
    assert patch.ops[0].path == "encodings.y.aggregate"
    assert patch.ops[0].value == "avg"


def test_unparseable_without_model():
    with pytest.raises(Unparseable):
        parse_customization("translate it to French", bar_chart())


def test_unparseable_with_stub_model_refusing():
    providers = Providers(model=StubModelAdapter(), clock=StubClock())  # no handler
    with pytest.raises(Unparseable):
        parse_customization("translate it to French", bar_chart(), providers)


def test_model_ops_filtered_to_allowlist():
    providers = Providers(
        model=StubModelAdapter(handlers={
            "customize_parse": lambda ctx: {"ops": [
                {"op": "set", "path": "style.palette", "value": "dark"},
                {"op": "set", "path": "data.values", "value": []},   # illegal: dropped
            ]},
        }),
        clock=StubClock(),
    )
    patch = parse_customization("use the dark theme", bar_chart(), providers)
    assert [op.path for op in patch.ops] == ["style.palette"]


def test_validate_rejects_heatmap_on_two_field_chart():
    chart = bar_chart()
    result = validate_patch(chart, ChartPatch(chart.chart_id, [
        PatchOp("set", "mark", "heatmap")]))
    assert not result.ok
    assert result.errors[0][0] == "IncompatibleMark"


def test_validate_accepts_hex_color():
    chart = bar_chart()
    result = validate_patch(chart, ChartPatch(chart.chart_id, [
        PatchOp("set", "style.mark_color", "#00FF00")]))
    assert result.ok


def test_validate_rejects_ghost_field():
    chart = bar_chart()
    result = validate_patch(chart, ChartPatch(chart.chart_id, [
        PatchOp("set", "encodings.y.field", "ghost")]))
    assert not result.ok
    assert result.errors[0][0] == "BadValue"


def test_validate_rejects_illegal_path_and_bad_tokens():
    chart = bar_chart()
    cases = [
        (PatchOp("set", "data.values", []), "IllegalPath"),
        (PatchOp("set", "style.mark_color", "bluish-green-ish"), "BadValue"),
        (PatchOp("set", "mark", "sunburst"), "BadValue"),
        (PatchOp("set", "encodings.x.sort", "sideways"), "BadValue"),
        (PatchOp("set", "style.palette", "neon"), "BadValue"),
        (PatchOp("set", "title", ""), "BadValue"),
    ]
    for op, code in cases:
        result = validate_patch(chart, ChartPatch(chart.chart_id, [op]))
        assert not result.ok
        assert result.errors[0][0] == code, op.path


def test_empty_ops_rejected():
    chart = bar_chart()
    assert not validate_patch(chart, ChartPatch(chart.chart_id, [])).ok


def test_apply_blue_patch_changes_only_color_and_revision():
    chart = bar_chart()
    patch = parse_customization("Change the color of this chart to blue", chart)
    updated = apply_patch(chart, patch)
    before, after = chart.to_dict(), updated.to_dict()
    assert after["style"]["mark_color"] == "blue"
    assert after["revision"] == before["revision"] + 1
    after["style"]["mark_color"] = before["style"]["mark_color"]
    after["revision"] = before["revision"]
    assert after == before  # nothing else moved


def test_apply_is_atomic_original_untouched():
    chart = bar_chart()
    snapshot = chart.to_dict()
    patch = ChartPatch(chart.chart_id, [PatchOp("set", "style.mark_color", "red")])
    apply_patch(chart, patch)
    assert chart.to_dict() == snapshot


def test_failing_validation_blocks_apply():
    chart = bar_chart()
    snapshot = chart.to_dict()
    patch = ChartPatch(chart.chart_id, [PatchOp("set", "mark", "heatmap")])
    with pytest.raises(BadValue):
        apply_patch(chart, patch)
    assert chart.to_dict() == snapshot


def test_bar_to_line_keeps_encodings():
    chart = bar_chart()
    patch = ChartPatch(chart.chart_id, [PatchOp("set", "mark", "line")])
    updated = apply_patch(chart, patch)
    assert updated.mark == ChartType.LINE
    assert updated.encodings["x"].field == chart.encodings["x"].field
    assert updated.encodings["y"].field == chart.encodings["y"].field
    assert updated.revision == chart.revision + 1


def test_bar_to_histogram_reassigns_channels():
    chart = bar_chart()
    patch = ChartPatch(chart.chart_id, [PatchOp("set", "mark", "histogram")])
    validation = validate_patch(chart, patch)
    assert validation.ok
    assert validation.reassignments  # recorded channel moves
    updated = apply_patch(chart, patch, validation)
    assert updated.mark == ChartType.HISTOGRAM
    assert updated.encodings["x"].field == "amount"
    assert "y" not in updated.encodings
    from datachat.viz import spec_problems

    assert spec_problems(updated) == []


def test_low_score_mark_warning_recorded():
    chart = bar_chart()
    validation = validate_patch(chart, ChartPatch(chart.chart_id, [
        PatchOp("set", "mark", "histogram")]))
    assert validation.ok
    assert any("below 0.5" in w for w in validation.warnings)


def test_round_trip_after_patch():
    from datachat.viz import ChartSpec

    chart = bar_chart()
    patch = ChartPatch(chart.chart_id, [PatchOp("set", "style.mark_color", "teal")])
    updated = apply_patch(chart, patch)
    assert ChartSpec.from_dict(updated.to_dict()).to_dict() == updated.to_dict()
