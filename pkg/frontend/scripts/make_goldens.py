"""Regenerate golden ChartSpec fixtures from the core package.

Run from the repo root: python3 frontend/scripts/make_goldens.py
Keeps the frontend's render/wire tests pinned to real server output.
"""

import json
import random
from pathlib import Path

from datachat.tabular import ResultTable, SemanticType
from datachat.viz import ChartType, build_chart_spec, preprocess

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

MONTHS = [f"2024-{m:02d}-01" for m in range(1, 13)]
REGIONS = ["east", "north", "south", "west"]


def spec_for(mark: ChartType, columns, rows):
    table = ResultTable(columns=columns, rows=rows,
                        source_sql=f"SELECT fixture FOR {mark.value}")
    pre = preprocess(table)
    return build_chart_spec(mark, pre.profiles, pre.table)


def main() -> None:
    rng = random.Random(8)
    OUT.mkdir(parents=True, exist_ok=True)

    monthly = [(m, 100.0 + i * 12.5) for i, m in enumerate(MONTHS)]
    t_q = [("month", SemanticType.TEMPORAL), ("amount", SemanticType.QUANTITATIVE)]

    fixtures = {
        "bar": spec_for(ChartType.BAR, t_q, monthly),
        "line": spec_for(
            ChartType.LINE,
            [("month", SemanticType.TEMPORAL), ("region", SemanticType.CATEGORICAL),
             ("amount", SemanticType.QUANTITATIVE)],
            [(m, r, 50.0 + i * 3.0 + REGIONS.index(r) * 20.0)
             for i, m in enumerate(MONTHS) for r in REGIONS[:2]],
        ),
        "area": spec_for(ChartType.AREA, t_q, monthly),
        "scatter": spec_for(
            ChartType.SCATTER,
            [("height", SemanticType.QUANTITATIVE), ("weight", SemanticType.QUANTITATIVE)],
            [(round(150 + rng.random() * 40, 1), round(50 + rng.random() * 40, 1))
             for _ in range(40)],
        ),
        "histogram": spec_for(
            ChartType.HISTOGRAM,
            [("amount", SemanticType.QUANTITATIVE)],
            [(round(rng.gauss(100, 15), 2),) for _ in range(300)],
        ),
        "heatmap": spec_for(
            ChartType.HEATMAP,
            [("month", SemanticType.TEMPORAL), ("region", SemanticType.CATEGORICAL),
             ("amount", SemanticType.QUANTITATIVE)],
            [(m, r, round(40 + 10 * ((i + j) % 5), 1))
             for i, m in enumerate(MONTHS[:6]) for j, r in enumerate(REGIONS)],
        ),
        "pie": spec_for(
            ChartType.PIE,
            [("region", SemanticType.CATEGORICAL), ("amount", SemanticType.QUANTITATIVE)],
            [(r, 100.0 + 25.0 * i) for i, r in enumerate(REGIONS)],
        ),
    }

    for name, spec in fixtures.items():
        path = OUT / f"{name}.json"
        path.write_text(json.dumps(spec.to_dict(), indent=1, sort_keys=True) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
