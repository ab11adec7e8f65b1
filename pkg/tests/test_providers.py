"""Provider contracts: structured completion, repair loop, search stubs."""

import json

import pytest
from hypothesis import given, strategies as st

from datachat.errors import AdapterUnavailable, SchemaViolation, Timeout
from datachat.providers.core import (
    SchemaField,
    SearchResultItem,
    StructuredPrompt,
    complete_structured,
    invoke_with_repair,
    normalize_query,
    prompt,
    search,
    validate_structured,
)
from datachat.providers.stubs import (
    DirectoryModelAdapter,
    DirectorySearchAdapter,
    StubClock,
    StubModelAdapter,
    StubSearchAdapter,
    fixture_key,
)

SCHEMA = (SchemaField("sql", "string"), SchemaField("tables", "array", required=False))


def make_prompt(context="ctx"):
    return StructuredPrompt(task_tag="sql_generate", context=context, output_schema=SCHEMA)


def test_prompt_rejects_unknown_tag_and_empty_schema():
    with pytest.raises(ValueError):
        StructuredPrompt(task_tag="nope", context="", output_schema=SCHEMA)
    with pytest.raises(ValueError):
        StructuredPrompt(task_tag="sql_generate", context="", output_schema=())


def test_validate_structured_accepts_conforming_value():
    assert validate_structured({"sql": "SELECT 1", "tables": []}, SCHEMA) == []


def test_validate_structured_reports_missing_and_mistyped():
    violations = validate_structured({"tables": "oops"}, SCHEMA)
    assert any("sql" in v for v in violations)
    assert any("tables" in v for v in violations)


def test_stub_fixture_value_returned_verbatim():
    adapter = StubModelAdapter(handlers={"sql_generate": lambda ctx: {"sql": "SELECT 1"}})
    value = complete_structured(make_prompt(), adapter, clock=StubClock())
    assert value == {"sql": "SELECT 1"}


def test_repair_retries_twice_then_succeeds():
    adapter = StubModelAdapter(script=[{"bad": 1}, {"bad": 2}, {"sql": "SELECT 1"}])
    events = []
    value = invoke_with_repair(make_prompt(), adapter, max_retries=2, events=events)
    assert value == {"sql": "SELECT 1"}
    assert len(events) == 3  # attempts = 1 + retries_used
    assert events[0]["violations"] and not events[2]["violations"]
    # the repair context carries the violation description forward
    assert "[repair]" in adapter.calls[1].context


def test_always_malformed_exhausts_after_three_attempts():
    adapter = StubModelAdapter(script=[{"bad": 1}, {"bad": 2}, {"bad": 3}])
    with pytest.raises(SchemaViolation):
        invoke_with_repair(make_prompt(), adapter, max_retries=2)
    assert len(adapter.calls) == 3


def test_zero_retries_fails_immediately():
    adapter = StubModelAdapter(script=[{"bad": 1}])
    with pytest.raises(SchemaViolation):
        invoke_with_repair(make_prompt(), adapter, max_retries=0)
    assert len(adapter.calls) == 1


def test_timeout_when_adapter_exceeds_deadline():
    class SlowClock(StubClock):
        def __init__(self):
            super().__init__(step_ms=40_000.0)

    adapter = StubModelAdapter(handlers={"sql_generate": lambda ctx: {"sql": "x"}})
    with pytest.raises(Timeout):
        complete_structured(make_prompt(), adapter, clock=SlowClock(), deadline_ms=30_000)


def test_missing_adapter_is_unavailable():
    with pytest.raises(AdapterUnavailable):
        complete_structured(make_prompt(), None)


def test_directory_model_adapter_round_trip(tmp_path):
    request = make_prompt("some context")
    path = tmp_path / f"sql_generate-{fixture_key('some context')}.json"
    path.write_text(json.dumps({"sql": "SELECT 2"}))
    adapter = DirectoryModelAdapter(tmp_path)
    assert adapter.complete(request) == {"sql": "SELECT 2"}
    with pytest.raises(AdapterUnavailable):
        adapter.complete(make_prompt("other context"))


def test_stub_determinism_same_context_same_value():
    adapter = StubModelAdapter(handlers={"sql_generate": lambda ctx: {"sql": f"Q:{ctx}"}})
    a = complete_structured(make_prompt("k"), adapter, clock=StubClock())
    b = complete_structured(make_prompt("k"), adapter, clock=StubClock())
    assert a == b


# --- search ----------------------------------------------------------------

FIXTURE_ITEMS = [
    {"title": "A", "url": "https://example.com/a", "snippet": "alpha"},
    {"title": "B", "url": "https://example.com/b", "snippet": "beta"},
    {"title": "C", "url": "https://example.com/c", "snippet": "gamma"},
]


def test_search_fixture_order_preserved():
    adapter = StubSearchAdapter({"q2 retail sales decline": FIXTURE_ITEMS})
    items = search("Q2  Retail   sales decline", 10, adapter)
    assert [i.url for i in items] == [f["url"] for f in FIXTURE_ITEMS]


def test_search_missing_fixture_is_empty_not_error():
    adapter = StubSearchAdapter({})
    assert search("anything", 3, adapter) == []


def test_search_k_truncates():
    adapter = StubSearchAdapter({"q": FIXTURE_ITEMS})
    items = search("q", 1, adapter)
    assert len(items) == 1 and items[0].title == "A"


def test_search_k_bounds():
    adapter = StubSearchAdapter({})
    for bad in (0, 11):
        with pytest.raises(ValueError):
            search("q", bad, adapter)


def test_search_item_url_validation_and_snippet_cap():
    with pytest.raises(ValueError):
        SearchResultItem(query="q", title="t", url="not a url", snippet="s")
    item = SearchResultItem(query="q", title="t", url="https://e.com", snippet="x" * 2000)
    assert len(item.snippet) == 1000


def test_directory_search_adapter(tmp_path):
    path = tmp_path / f"search-{fixture_key(normalize_query('Hello  World'))}.json"
    path.write_text(json.dumps(FIXTURE_ITEMS))
    adapter = DirectorySearchAdapter(tmp_path)
    assert len(adapter.search("hello world")) == 3
    assert adapter.search("unknown") == []


@given(st.text(max_size=60))
def test_normalize_query_idempotent(text):
    assert normalize_query(normalize_query(text)) == normalize_query(text)


def _jsonschema_for(schema):
    # independent validator: render our field list as real JSON Schema
    kinds = {"string": "string", "number": "number", "boolean": "boolean",
             "array": "array", "object": "object"}
    return {
        "type": "object",
        "properties": {f.name: {"type": kinds[f.kind]} for f in schema},
        "required": [f.name for f in schema if f.required],
    }


def test_outputs_conform_per_independent_jsonschema_validator():
    import jsonschema

    adapter = StubModelAdapter(handlers={
        "sql_generate": lambda ctx: {"sql": "SELECT 1", "tables": ["sales"]},
    })
    for _ in range(3):
        value = complete_structured(make_prompt(), adapter, clock=StubClock())
        jsonschema.validate(value, _jsonschema_for(SCHEMA))


def test_own_validator_agrees_with_jsonschema_on_fuzzed_values():
    import jsonschema

    cases = [
        {"sql": "SELECT 1"},
        {"sql": "SELECT 1", "tables": []},
        {"sql": 5},
        {"tables": []},
        {"sql": "x", "tables": "oops"},
        {"sql": True},
        [],
        {},
    ]
    reference = _jsonschema_for(SCHEMA)
    for value in cases:
        ours = not validate_structured(value, SCHEMA)
        validator = jsonschema.Draft7Validator(reference)
        theirs = validator.is_valid(value)
        # jsonschema treats booleans as valid numbers in some drafts; our
        # contract is stricter only for bool-vs-number, never looser
        if value == {"sql": True}:
            assert not ours
            continue
        assert ours == theirs, value


def test_http_adapters_speak_plain_json():
    import httpx

    from datachat.providers.http import HttpModelAdapter, HttpSearchAdapter

    def model_endpoint(request):
        body = json.loads(request.content)
        assert body["task_tag"] == "sql_generate"
        return httpx.Response(200, json={"value": {"sql": "SELECT 9"}})

    adapter = HttpModelAdapter("https://model.test/complete",
                               transport=httpx.MockTransport(model_endpoint))
    assert adapter.complete(make_prompt())["sql"] == "SELECT 9"

    def search_endpoint(request):
        return httpx.Response(200, json={"items": FIXTURE_ITEMS})

    search_adapter = HttpSearchAdapter("https://search.test/q",
                                       transport=httpx.MockTransport(search_endpoint))
    assert [i.title for i in search_adapter.search("q")] == ["A", "B", "C"]


def test_http_adapter_failure_is_unavailable():
    import httpx

    from datachat.providers.http import HttpModelAdapter

    adapter = HttpModelAdapter(
        "https://model.test/complete",
        transport=httpx.MockTransport(lambda r: httpx.Response(503)))
    with pytest.raises(AdapterUnavailable):
        adapter.complete(make_prompt())
