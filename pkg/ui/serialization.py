"""Deterministic JSON writer for reports.

Keys keep their insertion order (pydantic field order), floats are written
with 17 significant digits, −0.0 becomes 0 and non-finite floats become null.
"""

import json
import math
from typing import Any

import numpy as np
from pydantic import BaseModel

INDENT = 2


def format_float(value: float) -> str:
    if not math.isfinite(value):
        return "null"
    if value == 0.0:
        value = 0.0
    return format(value, ".17g")


def to_plain(value: Any) -> Any:
    """Convert models and numpy values into plain Python containers."""
    if isinstance(value, BaseModel):
        return to_plain(value.model_dump())
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    return value


def _encode(value: Any, level: int) -> str:
    pad = " " * (INDENT * (level + 1))
    end = " " * (INDENT * level)
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(k, ensure_ascii=False)}: {_encode(v, level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in value):
            return "[" + ", ".join(_encode(v, level + 1) for v in value) + "]"
        items = [f"{pad}{_encode(v, level + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(value: Any) -> str:
    """Serialize a report (or list of reports) to deterministic JSON text."""
    return _encode(to_plain(value), 0) + "\n"
