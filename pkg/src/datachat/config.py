"""Runtime limits and provider settings.

Settings load from a flat ``key = value`` config file (TOML-style scalars,
``#`` comments) and may be overridden by environment variables for the
provider endpoints. Defaults are desk-scale: conversational use never needs
more than 10k rows or a 30s statement deadline.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from pathlib import Path


@dataclass
class Settings:
    row_cap: int = 10_000
    default_limit: int = 10_000
    statement_deadline_ms: int = 30_000
    provider_deadline_ms: int = 30_000
    max_repair_retries: int = 2
    search_k: int = 3
    trend_r2_threshold: float = 0.5
    anomaly_score_threshold: float = 3.5
    correlation_r_threshold: float = 0.7
    categorical_plot_cap: int = 20
    storage_dir: str = "sessions"
    api_token: str = ""
    model_endpoint: str = ""
    model_key: str = ""
    search_endpoint: str = ""
    search_key: str = ""

    @classmethod
    def from_file(cls, path: str | Path) -> "Settings":
        values = _parse_kv_file(Path(path).read_text(encoding="utf-8"))
        fields = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            field = fields.get(key)
            if field is None:
                raise ValueError(f"unknown config key: {key}")
            kwargs[key] = _coerce(raw, field.type)
        return cls(**kwargs)

    def with_env_overrides(self, env: dict[str, str] | None = None) -> "Settings":
        env = os.environ if env is None else env
        out = dataclasses.replace(self)
        for attr, var in (
            ("model_endpoint", "MODEL_ENDPOINT"),
            ("model_key", "MODEL_KEY"),
            ("search_endpoint", "SEARCH_ENDPOINT"),
            ("search_key", "SEARCH_KEY"),
        ):
            if env.get(var):
                setattr(out, attr, env[var])
        return out


def _parse_kv_file(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        values[key.strip()] = raw.strip()
    return values


def _coerce(raw: str, kind: str) -> object:
    if raw and raw[0] in "\"'" and raw[-1] == raw[0] and len(raw) >= 2:
        return raw[1:-1]
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "bool":
        return raw.lower() in ("1", "true", "yes", "on")
    return raw
