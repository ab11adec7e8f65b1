"""Data preprocessing: null dropping, temporal promotion, category capping."""

import pytest

from datachat.errors import EmptyAfterCleaning
from datachat.tabular import ResultTable, SemanticType
from datachat.viz import preprocess


def make_table(rows, columns=None):
    columns = columns or [("month", SemanticType.TEMPORAL),
                          ("amount", SemanticType.QUANTITATIVE)]
    return ResultTable(columns=columns, rows=rows, source_sql="SELECT ...")


def test_null_rows_dropped_and_counted():
    rows = [(f"2024-01-{i+1:02d}", float(i)) for i in range(97)]
    rows += [("2024-02-01", None), (None, 5.0), ("2024-02-03", None)]
    result = preprocess(make_table(rows))
    assert len(result.table.rows) == 97
    assert result.dropped_rows == 3
    amount = next(p for p in result.profiles if p.name == "amount")
    assert amount.null_fraction == pytest.approx(2 / 100)


def test_iso_strings_promote_unknown_to_temporal():
    rows = [(f"2024-{m:02d}-01", float(m)) for m in range(1, 13)]
    table = make_table(rows, columns=[("when", SemanticType.UNKNOWN),
                                      ("amount", SemanticType.QUANTITATIVE)])
    result = preprocess(table)
    assert result.table.column_type("when") == SemanticType.TEMPORAL


def test_low_parse_rate_stays_unknown():
    rows = [("2024-01-01", 1.0), ("not a date", 2.0), ("also no", 3.0)]
    table = make_table(rows, columns=[("when", SemanticType.UNKNOWN),
                                      ("amount", SemanticType.QUANTITATIVE)])
    result = preprocess(table)
    assert result.table.column_type("when") == SemanticType.UNKNOWN


def test_all_null_single_column_raises():
    table = ResultTable(columns=[("v", SemanticType.QUANTITATIVE)],
                        rows=[(None,), (None,)])
    with pytest.raises(EmptyAfterCleaning):
        preprocess(table)


def test_categorical_cap_keeps_top_19_plus_other():
    rows = []
    for i in range(30):                     # 30 distinct categories
        for _ in range(30 - i):             # decreasing frequency
            rows.append((f"cat{i:02d}", 1.0))
    table = make_table(rows, columns=[("kind", SemanticType.CATEGORICAL),
                                      ("amount", SemanticType.QUANTITATIVE)])
    result = preprocess(table)
    values = set(result.table.column_values("kind"))
    assert len(values) == 20
    assert "Other" in values
    assert "cat00" in values and "cat18" in values
    assert "cat19" not in values            # 20th by frequency folds into Other


def test_preprocess_idempotent_on_table():
    rows = [(f"2024-01-{i+1:02d}", float(i)) for i in range(20)]
    rows.append((None, 1.0))
    once = preprocess(make_table(rows))
    twice = preprocess(once.table)
    assert twice.table.to_dict() == once.table.to_dict()
    assert twice.dropped_rows == 0
    # profiles identical apart from null_fraction, which is measured per call
    for a, b in zip(once.profiles, twice.profiles):
        da, db = a.to_dict(), b.to_dict()
        da.pop("null_fraction"), db.pop("null_fraction")
        assert da == db


def test_profiles_min_max_and_monotonic():
    rows = [(f"2024-01-{i+1:02d}", float(i)) for i in range(10)]
    result = preprocess(make_table(rows))
    amount = next(p for p in result.profiles if p.name == "amount")
    assert amount.min_value == 0.0 and amount.max_value == 9.0
    assert amount.monotonic is True
    assert amount.cardinality == 10


def test_zero_column_table_rejected():
    with pytest.raises(ValueError):
        preprocess(ResultTable(columns=[], rows=[]))
