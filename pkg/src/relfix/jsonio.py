"""Byte-stable JSON: sorted keys, two-space indent, floats at 17 significant digits.

The stdlib encoder always formats floats with ``float.__repr__``, so the
float case is handled here and everything else is delegated to ``json``.
"""

import json
import math

import numpy as np


def fmt_float(x):
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if all(ch not in text for ch in ".en"):
        text += ".0"
    return text


def _encode(obj, level, indent):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted((str(k), v) for k, v in obj.items())
        body = ",\n".join(f"{pad}{json.dumps(k)}: {_encode(v, level + 1, indent)}"
                          for k, v in items)
        return "{\n" + body + "\n" + end + "}"
    if isinstance(obj, (list, tuple, set, frozenset, np.ndarray)):
        seq = sorted(obj) if isinstance(obj, (set, frozenset)) else list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_encode(v, level + 1, indent) for v in seq) + "]"
        body = ",\n".join(pad + _encode(v, level + 1, indent) for v in seq)
        return "[\n" + body + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent=2):
    return _encode(obj, 0, indent) + "\n"


def load(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
