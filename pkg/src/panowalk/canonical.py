"""Canonical JSON: sorted keys, 6-decimal floats, compact separators.

Byte-identical output for equal data is load-bearing: manifests, walkmaps
and navigation traces are hashed and diffed, so the writer is deterministic
down to the byte. Object keys sort lexicographically, except when every key
is a digit string (frame indices), which sort numerically.
"""

from __future__ import annotations

import json
import math

import numpy as np


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite float in canonical JSON: {x!r}")
    s = f"{x:.6f}"
    if s == "-0.000000":
        s = "0.000000"
    return s


def _sorted_keys(keys: list[str]) -> list[str]:
    if keys and all(k.isdigit() for k in keys):
        return sorted(keys, key=int)
    return sorted(keys)


def _emit(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), out)
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        keys = list(obj.keys())
        if any(not isinstance(k, str) for k in keys):
            raise TypeError("canonical JSON object keys must be strings")
        for i, k in enumerate(_sorted_keys(keys)):
            if i:
                out.append(",")
            out.append(json.dumps(k))
            out.append(":")
            _emit(obj[k], out)
        out.append("}")
    else:
        raise TypeError(f"unsupported type for canonical JSON: {type(obj)!r}")


def dumps(obj) -> str:
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)


def dump_bytes(obj) -> bytes:
    return dumps(obj).encode("ascii") + b"\n"
