"""Matrix input/output: JSON {"dim", "rows"} or flat CSV."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import ParseError


def _pos_of(text: str, index: int):
    line = text.count("\n", 0, index) + 1
    col = index - (text.rfind("\n", 0, index) + 1) + 1
    return line, col


def parse_json(text: str) -> np.ndarray:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    if not isinstance(obj, dict) or "rows" not in obj:
        raise ParseError('expected an object with a "rows" field', 1, 1)
    rows = obj["rows"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ParseError('"rows" must be a list of lists')
    d = obj.get("dim", len(rows))
    if not isinstance(d, int) or d != len(rows):
        raise ParseError(f'"dim" = {d!r} does not match {len(rows)} rows')
    for i, r in enumerate(rows):
        if len(r) != d:
            raise ParseError(f"row {i} has {len(r)} entries, expected {d}")
        for j, v in enumerate(r):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError(f"entry ({i},{j}) is not a number: {v!r}")
    return np.array(rows, dtype=float)


def parse_csv(text: str) -> np.ndarray:
    rows = []
    for lineno, rec in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not rec or all(not c.strip() for c in rec):
            continue
        row = []
        for colno, cell in enumerate(rec, start=1):
            try:
                row.append(float(cell))
            except ValueError:
                raise ParseError(f"not a number: {cell.strip()!r}", lineno, colno) from None
        rows.append((lineno, row))
    if not rows:
        raise ParseError("empty matrix", 1, 1)
    d = len(rows)
    for lineno, row in rows:
        if len(row) != d:
            raise ParseError(f"expected {d} values, found {len(row)}", lineno)
    return np.array([r for _, r in rows], dtype=float)


def parse_matrix(text: str, fmt: str | None = None) -> np.ndarray:
    """Parse a matrix; ``fmt`` is 'json', 'csv' or None to sniff."""
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "csv"
    if fmt == "json":
        return parse_json(text)
    if fmt == "csv":
        return parse_csv(text)
    raise ValueError(f"unknown format {fmt!r}")


def read_matrix(path, fmt: str | None = None) -> np.ndarray:
    path = Path(path)
    if fmt is None and path.suffix.lower() in (".json", ".csv"):
        fmt = path.suffix.lower()[1:]
    return parse_matrix(path.read_text(encoding="utf-8"), fmt)


def fmt_float(x: float) -> str:
    """17 significant digits so that parsing the text gives back x exactly."""
    x = float(x)
    if x == 0.0:
        return "0"
    return f"{x:.17g}"


def matrix_to_json(A) -> dict:
    A = np.asarray(A, dtype=float)
    return {"dim": int(A.shape[0]), "rows": [[float(v) for v in r] for r in A]}


def matrix_to_csv(A) -> str:
    A = np.asarray(A, dtype=float)
    return "".join(",".join(fmt_float(v) for v in r) + "\n" for r in A)


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool)
               for v in obj):
            return "[" + ", ".join(_encode(v, indent, level) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            return "null"
        return fmt_float(x)
    if obj is None:
        return "null"
    return json.dumps(str(obj), ensure_ascii=False)


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON with 17-digit floats and compact numeric rows."""
    return _encode(obj, indent, 0) + "\n"
