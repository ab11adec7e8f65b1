"""Acceptance gate: every shipping criterion, offline, stub providers only.

Each test prints one `ACCEPTANCE <n> ... PASS` line when it holds; a failing
criterion fails its test with the usual pytest diagnostics.
"""

import random
import time
import pytest

from datachat.canonical import digest
from datachat.errors import DataChatError
from datachat.analysis import detect_anomalies, detect_correlations, detect_trend
from datachat.explain import UNGROUNDED_MARKER
from datachat.state import ConversationState, UserMessage
from datachat.tabular import ResultTable, SemanticType
from datachat.viz import rank_charts
from datachat.workflow import default_graph, replay_trace, run_turn

from conftest import default_turn_providers

BAR_QUESTION = "Show me a bar chart of sales by month"
MULTI_QUESTION = "Show me a bar chart of sales and explain the biggest trend"
RAW_SALES_SQL = "SELECT month, amount FROM sales ORDER BY month, amount"
SQL_FIXTURES = {BAR_QUESTION: RAW_SALES_SQL, MULTI_QUESTION: RAW_SALES_SQL}


def report(number: int, label: str) -> None:
    print(f"ACCEPTANCE {number}: {label}: PASS")


def connected(sales_config, sales_snapshot, session="acc") -> ConversationState:
    state = ConversationState(session_id=session)
    state.active_connection = sales_config
    state.schema_cache = sales_snapshot
    return state


def message(state, text, at="2024-06-01T00:00:00+00:00") -> UserMessage:
    return UserMessage(session_id=state.session_id, text=text, received_at=at)


def test_criterion_1_bar_chart_request_end_to_end(sales_config, sales_snapshot):
    state = connected(sales_config, sales_snapshot)
    started = time.perf_counter()
    new_state, bundle = run_turn(state, message(state, BAR_QUESTION),
                                 default_graph(), default_turn_providers(SQL_FIXTURES))
    elapsed = time.perf_counter() - started

    assert len(bundle.charts) == 1, "exactly one chart expected"
    chart = bundle.charts[0]
    assert chart.mark.value == "bar"
    assert chart.encodings["x"].field == "month"
    assert chart.encodings["y"].field == "amount"
    assert chart.encodings["y"].aggregate == "sum"
    assert elapsed < 5.0, f"turn took {elapsed:.2f}s"

    # the bar mark comes from user-request promotion, not the data-driven rank
    table = new_state.last_table
    from datachat.viz import ChartType, preprocess

    profiles = preprocess(table).profiles
    ranked = rank_charts(profiles, explicit_request=ChartType.BAR)
    assert ranked.entries[0] == (ChartType.BAR, 1.0, "user-requested")
    assert rank_charts(profiles).top() == ChartType.LINE  # would win without the request
    report(1, "bar-chart request end-to-end")


def test_criterion_2_multi_intent_node_sequence(sales_config, sales_snapshot):
    state = connected(sales_config, sales_snapshot)
    new_state, bundle = run_turn(state, message(state, MULTI_QUESTION),
                                 default_graph(), default_turn_providers(SQL_FIXTURES))
    sequence = [event.node for event in new_state.trace]
    assert sequence == ["SqlAgent", "VisualizationAgent", "AnalysisAgent",
                        "ExplanationAgent", "ResponseGenerator"]
    assert all(event.status == "ok" for event in new_state.trace)
    report(2, "multi-intent activation order")


def test_criterion_3_sql_safety_fuzz(sales_config, sales_snapshot, sales_db):
    import hashlib

    from datachat.sqlkit.execute import execute_sql
    from datachat.sqlkit.validate import validate_sql
    from test_sql_execute import fuzz_corpus

    before = hashlib.sha256(sales_db.read_bytes()).hexdigest()
    corpus = fuzz_corpus(count=1000, seed=20240810)
    accepted_mutations = []
    executed = 0
    for sql, mutating in corpus:
        try:
            validated = validate_sql(sql, sales_snapshot)
        except DataChatError:
            continue
        if mutating:
            accepted_mutations.append(sql)
            continue
        try:
            execute_sql(validated, sales_config, row_cap=50)
            executed += 1
        except DataChatError:
            pass
    assert accepted_mutations == [], "validator accepted mutating statements"
    assert executed > 100
    after = hashlib.sha256(sales_db.read_bytes()).hexdigest()
    assert after == before, "database file changed under fuzz execution"
    report(3, "1000-statement fuzz: non-SELECT rejected, checksum unchanged")


def test_criterion_4_ranker_matches_oracle_table():
    import json
    from pathlib import Path

    from test_viz_rank import profiles_for, top1_or_none

    oracle = json.loads((Path(__file__).parent / "data" / "rank_oracle.json").read_text())
    mismatches = 0
    for entry in oracle["entries"]:
        if top1_or_none(profiles_for(entry["types"])) != entry["top1"]:
            mismatches += 1
    assert mismatches == 0

    rng = random.Random(4242)
    atoms = ["quantitative", "quantitative", "temporal", "categorical:small",
             "categorical:large", "boolean", "unknown"]
    for _ in range(1000):
        chosen = rng.sample(atoms, k=rng.randrange(1, 5))
        profiles = profiles_for(chosen)
        baseline = top1_or_none(profiles)
        rng.shuffle(profiles)
        assert top1_or_none(profiles) == baseline
    report(4, "ranker oracle table exact + permutation invariance")


def test_criterion_5_statistics_oracles():
    from test_analysis import pearson_oracle

    # Pearson vs brute force on 100 seeded tables
    rng = random.Random(515151)
    for _ in range(100):
        n = rng.randrange(5, 50)
        cols = rng.randrange(2, 6)
        base = [rng.gauss(0, 1) for _ in range(n)]
        data = []
        for _c in range(cols):
            if rng.random() < 0.5:
                k = rng.uniform(0.5, 2.5) * (1 if rng.random() < 0.5 else -1)
                data.append([k * b + rng.gauss(0, 0.4) for b in base])
            else:
                data.append([rng.gauss(0, 1) for _ in range(n)])
        names = [f"q{c}" for c in range(cols)]
        table = ResultTable(columns=[(nm, SemanticType.QUANTITATIVE) for nm in names],
                            rows=list(zip(*data)))
        expected = {}
        for i in range(cols):
            for j in range(i + 1, cols):
                r = pearson_oracle(data[i], data[j])
                if r is not None and abs(r) >= 0.7:
                    expected[tuple(sorted((names[i], names[j])))] = r
        got = {(f.field_a, f.field_b): f.r for f in detect_correlations(table)}
        assert set(got) == set(expected)
        for key, value in expected.items():
            assert abs(got[key] - value) <= 1e-9

    # anomaly index invariance under y -> a*y + b, a > 0, on 1000 seeded series
    rng = random.Random(626262)
    for _ in range(1000):
        n = rng.randrange(6, 40)
        y = [rng.gauss(0, 1) for _ in range(n)]
        if rng.random() < 0.4:
            y[rng.randrange(n)] += rng.uniform(6, 15)
        a, b = rng.uniform(0.05, 20.0), rng.uniform(-100, 100)
        base = {f.row_index for f in detect_anomalies(y)}
        moved = {f.row_index for f in detect_anomalies([a * v + b for v in y])}
        assert base == moved

    # noiseless affine recovery to 1e-9 with r2 == 1
    rng = random.Random(737373)
    for _ in range(200):
        slope = rng.uniform(-10, 10) or 0.5
        intercept = rng.uniform(-1000, 1000)
        n = rng.randrange(3, 80)
        series = [slope * i + intercept for i in range(n)]
        finding = detect_trend(series)
        assert finding is not None
        assert abs(finding.slope - slope) <= 1e-9 * max(1.0, abs(slope))
        assert abs(finding.intercept - intercept) <= 1e-6
        assert abs(finding.r2 - 1.0) <= 1e-9
    report(5, "Pearson/anomaly/trend detectors match independent oracles")


TURN_SCRIPT = [
    BAR_QUESTION,
    "any anomalies in amount?",
    "explain why",
    "Change the color of this chart to blue",
    "make it a line chart",
    "average amount by region",
    "hello there",
    MULTI_QUESTION,
    "total amount",
    "sort by month desc",
]


def test_criterion_6_determinism_and_replay(sales_config, sales_snapshot):
    graph = default_graph()
    state = connected(sales_config, sales_snapshot)
    differences = 0
    for turn_no in range(50):
        text = TURN_SCRIPT[turn_no % len(TURN_SCRIPT)]
        msg = message(state, text, at=f"2024-06-01T00:{turn_no:02d}:00+00:00")
        before = state.copy()

        state_a, bundle_a = run_turn(state, msg, graph, default_turn_providers(SQL_FIXTURES))
        state_b, bundle_b = run_turn(before.copy(), msg, graph,
                                     default_turn_providers(SQL_FIXTURES))
        if digest(bundle_a) != digest(bundle_b):
            differences += 1
        if state_a.to_text() != state_b.to_text():
            differences += 1

        new_events = state_a.trace[len(before.trace):]
        replayed = replay_trace(before, msg, new_events, graph,
                                default_turn_providers(SQL_FIXTURES))
        assert digest(replayed) == digest(bundle_a), f"replay diverged on turn {turn_no}"
        state = state_a
    assert differences == 0
    assert len(state.history) == 50
    report(6, "50 double-executed turns and replays bit-identical")


def test_criterion_7_explanation_grounding(sales_config, sales_snapshot):
    from datachat.analysis import generate_insights
    from datachat.explain import execute_search_plan, plan_searches, synthesize_explanation
    from datachat.providers.core import Providers
    from datachat.providers.stubs import StubClock, StubSearchAdapter
    from datachat.viz import preprocess

    # build a real insight from the fixture data
    state = connected(sales_config, sales_snapshot)
    new_state, _ = run_turn(state, message(state, BAR_QUESTION), default_graph(),
                            default_turn_providers(SQL_FIXTURES))
    table = preprocess(new_state.last_table).table
    insight = generate_insights(table)
    assert insight.findings, "fixture data must yield findings"

    plan = plan_searches(insight, "Explain why sales rose through the year")
    fixtures = {
        plan.queries[0]: [
            {"title": "Market report", "url": "https://news.example/a", "snippet": "s1"},
            {"title": "Retail trends", "url": "https://news.example/b", "snippet": "s2"},
        ],
    }
    providers = Providers(search=StubSearchAdapter(fixtures), clock=StubClock())
    fabricated = 0
    for _ in range(25):  # corpus of repeated runs stays citation-sound
        evidence = execute_search_plan(plan, providers)
        explanation = synthesize_explanation(insight, evidence)
        assert explanation.grounded
        for url in explanation.citations:
            if url not in evidence.urls():
                fabricated += 1
    assert fabricated == 0

    # empty search results: the turn bundle carries the ungrounded marker
    state2 = connected(sales_config, sales_snapshot, session="acc2")
    _, bundle = run_turn(state2, message(state2, MULTI_QUESTION), default_graph(),
                         default_turn_providers(SQL_FIXTURES))
    assert bundle.explanation is not None
    assert bundle.explanation.grounded is False
    assert UNGROUNDED_MARKER in bundle.explanation.text
    assert UNGROUNDED_MARKER in bundle.message
    report(7, "citations only from gathered evidence; marker when none")


def test_criterion_8_customization_atomicity(sales_config, sales_snapshot):
    graph = default_graph()
    state = connected(sales_config, sales_snapshot)
    state, _ = run_turn(state, message(state, BAR_QUESTION), graph,
                        default_turn_providers(SQL_FIXTURES))
    original = state.charts[-1].to_dict()

    state, bundle = run_turn(state, message(state, "Change the color of this chart to blue"),
                             graph, default_turn_providers(SQL_FIXTURES))
    updated = state.charts[-1].to_dict()
    assert updated["style"]["mark_color"] == "blue"
    assert updated["revision"] == original["revision"] + 1
    patched = dict(updated)
    patched["style"] = dict(updated["style"], mark_color=original["style"]["mark_color"])
    patched["revision"] = original["revision"]
    assert patched == original, "fields other than color/revision changed"
    assert bundle.errors == []

    # an invalid patch must leave the stored chart bit-identical
    before_invalid = state.charts[-1].to_dict()
    state, bundle = run_turn(state, message(state, "make it a heatmap"), graph,
                             default_turn_providers(SQL_FIXTURES))
    assert any(code == "IncompatibleMark" for code, _ in bundle.errors)
    assert state.charts[-1].to_dict() == before_invalid
    report(8, "color patch minimal + invalid patch leaves state bit-identical")
