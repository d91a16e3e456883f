"""Canonical JSON emission and JSONL helpers.

Batch outputs must be byte-stable across runs, so floats are always
formatted with 9 significant digits and objects keep insertion order.
"""

from __future__ import annotations

import json
import math
from typing import Any, Iterator, TextIO


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return format(x, ".9g")


def dumps(obj: Any) -> str:
    """Compact deterministic JSON with 9-significant-digit floats."""
    parts: list[str] = []
    _write(obj, parts)
    return "".join(parts)


def _write(obj: Any, parts: list[str]) -> None:
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, str):
        parts.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, float):
        parts.append(format_float(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        for k, (key, value) in enumerate(obj.items()):
            if k:
                parts.append(",")
            if not isinstance(key, str):
                raise TypeError(f"object keys must be strings, got {key!r}")
            parts.append(json.dumps(key, ensure_ascii=False))
            parts.append(":")
            _write(value, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for k, value in enumerate(obj):
            if k:
                parts.append(",")
            _write(value, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_line(fh: TextIO, obj: Any) -> None:
    fh.write(dumps(obj))
    fh.write("\n")


def iter_jsonl(fh: TextIO) -> Iterator[tuple[int, Any, str | None]]:
    """Yield (line_number, parsed_object_or_None, error_message_or_None).

    Malformed lines surface as inline errors so batch commands can keep
    going; blank lines are skipped.
    """
    for lineno, line in enumerate(fh, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            yield lineno, json.loads(stripped), None
        except json.JSONDecodeError as exc:
            yield lineno, None, f"line {lineno}: invalid JSON ({exc.msg})"
