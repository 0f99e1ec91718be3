"""Text tensor format and partition JSON.

Tensor text::

    dims: n1 n2 ... nd
    v1 v2 ...            (N = n1*...*nd reals, row-major, any whitespace)

Partition JSON is an array of ``{"lo": [...], "hi": [...]}`` objects with
an optional ``"coeffs"`` list per rectangle.
"""
from __future__ import annotations

import json

import numpy as np

from .lattice import LatticeArray, Partition, Rect


class FormatError(ValueError):
    pass


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def parse_tensor(text: str) -> LatticeArray:
    lines = text.splitlines()
    while lines and not lines[0].strip():
        lines.pop(0)
    if not lines or not lines[0].lstrip().startswith("dims:"):
        raise FormatError("line 1: expected 'dims: n1 ... nd'")
    try:
        dims = tuple(int(t) for t in lines[0].split(":", 1)[1].split())
    except ValueError as exc:
        raise FormatError(f"line 1: bad dimension ({exc})") from None
    if not dims or any(n < 1 for n in dims):
        raise FormatError(f"line 1: dims must be positive integers, got {dims}")
    tokens = " ".join(lines[1:]).split()
    expected = int(np.prod(dims))
    if len(tokens) != expected:
        raise FormatError(f"expected {expected} values for dims {dims}, found {len(tokens)}")
    try:
        values = np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise FormatError(f"non-numeric value ({exc})") from None
    if not np.all(np.isfinite(values)):
        raise FormatError("values must be finite")
    return LatticeArray(dims, values)


def read_tensor(path) -> LatticeArray:
    with open(path) as fh:
        return parse_tensor(fh.read())


def format_tensor(y) -> str:
    arr = y.values if isinstance(y, LatticeArray) else np.asarray(y, dtype=float)
    rows = arr.reshape(-1, arr.shape[-1])
    out = ["dims: " + " ".join(str(n) for n in arr.shape)]
    out += [" ".join(fmt(v) for v in row) for row in rows]
    return "\n".join(out) + "\n"


def write_tensor(path, y) -> None:
    with open(path, "w") as fh:
        fh.write(format_tensor(y))


def partition_to_json(p: Partition, coeffs=None) -> str:
    items = []
    for i, r in enumerate(p.rects):
        item = {"lo": list(r.lo), "hi": list(r.hi)}
        if coeffs is not None:
            item["coeffs"] = [float(c) for c in coeffs[i]]
        items.append(item)
    return json.dumps(items, indent=1)


def partition_from_json(text: str, dims, family: str = "arbitrary") -> Partition:
    try:
        items = json.loads(text)
        rects = tuple(Rect(tuple(it["lo"]), tuple(it["hi"])) for it in items)
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"bad partition JSON: {exc}") from None
    return Partition(Rect.full(dims), rects, family)
