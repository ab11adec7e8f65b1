"""Intent classification rules, suppression, and model-merge behavior."""

import pytest
from hypothesis import given, strategies as st

from datachat.intents import (
    DEFAULT_LEXICONS,
    Intent,
    IntentSet,
    IntentEntry,
    classify,
    load_lexicons,
    rule_classify,
)
from datachat.providers.core import Providers
from datachat.providers.stubs import StubClock, StubModelAdapter


def intents_of(result):
    return [e.intent for e in result.entries]


def test_bar_chart_request_is_visualization():
    result = rule_classify("Show me a bar chart of sales by month")
    assert intents_of(result) == [Intent.VISUALIZATION]


def test_unusual_spikes_request_is_insight():
    result = rule_classify("Find any unusual spikes in website traffic")
    assert intents_of(result) == [Intent.INSIGHT]


def test_color_change_is_customization_with_chart():
    result = rule_classify("Change the color of this chart to blue", has_chart=True)
    assert intents_of(result) == [Intent.CUSTOMIZATION]


def test_color_change_without_chart_keeps_visualization():
    result = rule_classify("Change the color of this chart to blue", has_chart=False)
    assert Intent.VISUALIZATION in intents_of(result)
    assert Intent.CUSTOMIZATION in intents_of(result)


def test_empty_text_maps_to_other():
    assert intents_of(rule_classify("")) == [Intent.OTHER]
    assert intents_of(rule_classify("   \t ")) == [Intent.OTHER]


def test_multi_intent_example_orders_by_precedence():
    result = rule_classify("Show me a bar chart of sales and explain the biggest trend")
    assert intents_of(result) == [Intent.VISUALIZATION, Intent.INSIGHT, Intent.EXPLANATION]


def test_explain_why_request_is_explanation():
    result = rule_classify("Explain why sales dropped in Q2")
    assert intents_of(result) == [Intent.EXPLANATION]


def test_connect_is_system():
    result = rule_classify("Connect to a new database")
    assert intents_of(result) == [Intent.SYSTEM]


def test_suppression_lifts_for_new_column_mentions():
    result = rule_classify(
        "Change this chart to show revenue instead",
        has_chart=True,
        chart_fields=["month", "amount"],
        known_columns=["month", "amount", "revenue"],
    )
    assert Intent.VISUALIZATION in intents_of(result)


def test_case_insensitive_classification():
    lower = rule_classify("show me a bar chart")
    upper = rule_classify("SHOW ME A BAR CHART")
    assert intents_of(lower) == intents_of(upper)


def test_other_exclusive_invariant_enforced():
    with pytest.raises(ValueError):
        IntentSet([IntentEntry(Intent.OTHER, 1.0, "rule"),
                   IntentEntry(Intent.INSIGHT, 1.0, "rule")])


@given(st.text(max_size=120))
def test_closed_label_set_and_other_exclusivity(text):
    result = rule_classify(text)
    labels = intents_of(result)
    assert labels, "intent set never empty"
    assert all(isinstance(i, Intent) for i in labels)
    if Intent.OTHER in labels:
        assert labels == [Intent.OTHER]


def test_classify_without_provider_equals_rules():
    text = "Show me a scatter plot"
    with_none, fell_back = classify(text, providers=None)
    assert not fell_back
    assert with_none.to_dict() == rule_classify(text).to_dict()


def test_classify_model_adds_but_never_removes():
    providers = Providers(
        model=StubModelAdapter(handlers={
            "intent_refine": lambda ctx: {"intents": ["Insight", "Garbage", "Visualization"]},
        }),
        clock=StubClock(),
    )
    result, fell_back = classify("show me a bar chart", providers=providers)
    assert not fell_back
    labels = intents_of(result)
    assert labels == [Intent.VISUALIZATION, Intent.INSIGHT]
    # rule hit stays at confidence 1.0; the added one is below
    confidences = {e.intent: e.confidence for e in result.entries}
    assert confidences[Intent.VISUALIZATION] == 1.0
    assert confidences[Intent.INSIGHT] < 1.0


def test_classify_bad_label_discarded():
    providers = Providers(
        model=StubModelAdapter(handlers={
            "intent_refine": lambda ctx: {"intents": ["Sorcery"]},
        }),
        clock=StubClock(),
    )
    result, fell_back = classify("show me a bar chart", providers=providers)
    assert intents_of(result) == [Intent.VISUALIZATION]
    assert not fell_back


def test_classify_provider_failure_falls_back_silently():
    providers = Providers(model=StubModelAdapter(), clock=StubClock())  # no handlers
    result, fell_back = classify("show me a bar chart", providers=providers)
    assert fell_back
    assert intents_of(result) == [Intent.VISUALIZATION]


def test_model_promotes_other_to_real_intent():
    providers = Providers(
        model=StubModelAdapter(handlers={
            "intent_refine": lambda ctx: {"intents": ["System"]},
        }),
        clock=StubClock(),
    )
    result, _ = classify("hmm", providers=providers)
    assert intents_of(result) == [Intent.SYSTEM]


def test_lexicons_loadable_from_config(tmp_path):
    config = tmp_path / "lexicons.txt"
    config.write_text(
        "# extended vocabulary\n"
        "Visualization: chart, draw, render\n"
        "System: connect, database, backup\n"
    )
    lexicons = load_lexicons(config)
    assert "draw" in lexicons[Intent.VISUALIZATION]
    assert lexicons[Intent.INSIGHT] == DEFAULT_LEXICONS[Intent.INSIGHT]
    result = rule_classify("please draw sales", lexicons=lexicons)
    assert Intent.VISUALIZATION in intents_of(result)
