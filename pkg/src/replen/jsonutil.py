"""Canonical JSON helpers shared by the audit log, digests, and APIs."""

from __future__ import annotations

import hashlib
import json
import math
from enum import Enum
from typing import Any


def jsonable(obj: Any) -> Any:
    """Recursively convert a value into plain JSON-safe types.

    Enums become their values, tuples become lists, non-finite floats become
    the strings "inf"/"-inf"/"nan" (plain JSON has no spelling for them), and
    objects exposing to_dict() are converted through it.
    """
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, Enum):
        return jsonable(obj.value)
    if isinstance(obj, dict):
        return {_key(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(jsonable(v) for v in obj)
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    raise TypeError(f"not JSON-serializable: {type(obj).__name__}")


def _key(k: Any) -> str:
    if isinstance(k, str):
        return k
    if isinstance(k, Enum):
        return str(k.value)
    if isinstance(k, tuple):
        return "/".join(str(p) for p in k)
    return str(k)


def canonical_json(obj: Any) -> str:
    """Deterministic compact JSON: sorted keys, no whitespace, no NaN."""
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)


def digest(obj: Any) -> str:
    """sha256 hex digest of the canonical JSON form."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()
