"""JSON writer that renders every real with 17 significant digits.

The stdlib encoder prints the shortest round-trip repr; we want a fixed,
documented rendering so result documents can be compared byte for byte.
Keys are sorted.  Non-finite reals become ``null``.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np


def format_real(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = "%.17g" % x
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def _encode(obj: Any, out: list[str], indent: int | None, level: int) -> None:
    if obj is None or obj is True or obj is False:
        out.append(json.dumps(obj))
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_real(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        items = sorted(obj.items(), key=lambda kv: str(kv[0]))
        out.append("{")
        for i, (k, v) in enumerate(items):
            if i:
                out.append(",")
            _newline(out, indent, level + 1)
            out.append(json.dumps(str(k)))
            out.append(": " if indent is not None else ":")
            _encode(v, out, indent, level + 1)
        _newline(out, indent, level)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        if len(seq) == 0:
            out.append("[]")
            return
        out.append("[")
        for i, v in enumerate(seq):
            if i:
                out.append(",")
            _encode(v, out, None, level + 1)
        out.append("]")
    else:
        raise TypeError(f"cannot encode {type(obj).__name__}")


def _newline(out: list[str], indent: int | None, level: int) -> None:
    if indent is not None:
        out.append("\n" + " " * (indent * level))


def dumps(obj: Any, indent: int | None = 2) -> str:
    out: list[str] = []
    _encode(obj, out, indent, 0)
    return "".join(out)
