"""Deterministic text output.

Every float is written as %.16e (17 significant digits) so files round-trip
exactly and repeated runs are byte-identical.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def fmt17(x) -> str:
    return format(float(x), ".16e")


def _render(value, depth: int) -> str:
    pad = "  " * depth
    inner = "  " * (depth + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f'{inner}{json.dumps(str(k))}: {_render(v, depth + 1)}'
                 for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        seq = list(value)
        if not seq:
            return "[]"
        items = [f"{inner}{_render(v, depth + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt17(value)
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dump_json(path, obj: dict) -> None:
    Path(path).write_text(_render(obj, 0) + "\n")


def write_csv(path, header: str, columns) -> None:
    """Write equal-length columns under a comma-separated header line."""
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise ValueError("columns differ in length")
    lines = [header]
    lines.extend(",".join(fmt17(c[i]) for c in cols) for i in range(n))
    Path(path).write_text("\n".join(lines) + "\n")
