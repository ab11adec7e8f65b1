"""Canonical serialization and content digests.

Everything that needs byte-stable equality (trace digests, replay checks,
chart ids, session persistence) goes through ``canonical_json``: keys sorted,
minimal separators, ASCII-only escapes. Dataclasses are serialized via their
``to_dict`` method when present, else ``dataclasses.asdict``.
"""

from __future__ import annotations

import dataclasses
import hashlib
from enum import Enum
import json
from typing import Any


def jsonable(value: Any) -> Any:
    """Reduce a value to plain JSON types (dict/list/str/number/bool/None)."""
    if value is None or isinstance(value, (str, int, float, bool)):
        return value
    if isinstance(value, Enum):
        return value.value
    if hasattr(value, "to_dict"):
        return jsonable(value.to_dict())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    raise TypeError(f"cannot canonicalize value of type {type(value).__name__}")


def canonical_json(value: Any) -> str:
    return json.dumps(jsonable(value), sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def digest(value: Any) -> str:
    """Hex sha256 of the canonical JSON form."""
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


def short_digest(value: Any, length: int = 12) -> str:
    return digest(value)[:length]
