"""Deterministic JSON writing with pinned float precision.

Emitted files print every float with 17 significant digits so that values
round-trip exactly and repeated runs are byte-identical. The stdlib encoder
formats floats with repr (shortest round-trip) and offers no hook to change
that, hence this small emitter. Reading uses stdlib json as usual.
"""

from __future__ import annotations

import json
import math
from pathlib import Path


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite float in JSON payload: {x!r}")
    return f"{x:.17g}"


def dumps(obj, indent: int = 2) -> str:
    pieces: list[str] = []
    _emit(obj, pieces, indent, 0)
    pieces.append("\n")
    return "".join(pieces)


def dump(path, obj, indent: int = 2) -> None:
    Path(path).write_text(dumps(obj, indent=indent), encoding="utf-8")


def _emit(obj, out: list[str], indent: int, level: int) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):  # bool before int: True is an int
        out.append("true" if obj else "false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, dict):
        _emit_items(
            ((json.dumps(str(k), ensure_ascii=False) + ": ", v) for k, v in obj.items()),
            len(obj), "{", "}", out, indent, level,
        )
    elif isinstance(obj, (list, tuple)):
        _emit_items(((None, v) for v in obj), len(obj), "[", "]", out, indent, level)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} deterministically")


def _emit_items(items, count, open_ch, close_ch, out, indent, level) -> None:
    if count == 0:
        out.append(open_ch + close_ch)
        return
    inner = " " * (indent * (level + 1))
    out.append(open_ch + "\n")
    for pos, (prefix, value) in enumerate(items):
        out.append(inner)
        if prefix is not None:
            out.append(prefix)
        _emit(value, out, indent, level + 1)
        out.append(",\n" if pos + 1 < count else "\n")
    out.append(" " * (indent * level) + close_ch)
