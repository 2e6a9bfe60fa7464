"""System files and CSV output.

A system file is JSON with keys ``n``, ``p``, ``c`` and ``q`` (matrices
either nested or flat row-major) and an optional ``geometry`` block.
Entries may be JSON numbers or strings holding a decimal or a fraction
such as ``"1/3"``; either way each entry becomes the correctly rounded
double.  NaN and infinities are rejected.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .model import MarkovSystem


class SystemFileError(ValueError):
    """The file is not a well-formed system description."""


def _reject_constant(name):
    raise SystemFileError(f"non-finite constant {name} is not allowed")


def _finite_float(text):
    value = float(text)
    if not math.isfinite(value):
        raise SystemFileError(f"number {text} overflows to a non-finite value")
    return value


def _number(x, where):
    if isinstance(x, bool):
        raise SystemFileError(f"{where}: booleans are not numbers")
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            value = Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise SystemFileError(f"{where}: cannot parse {x!r}") from exc
        try:
            out = float(value)
        except OverflowError as exc:
            raise SystemFileError(f"{where}: {x!r} overflows") from exc
        return out
    raise SystemFileError(f"{where}: expected a number, got {type(x).__name__}")


def _matrix(raw, n, key):
    if not isinstance(raw, list):
        raise SystemFileError(f"{key} must be an array")
    if raw and all(isinstance(r, list) for r in raw):
        if len(raw) != n or any(len(r) != n for r in raw):
            raise SystemFileError(f"{key} must be {n}x{n}")
        flat = [v for r in raw for v in r]
    else:
        if len(raw) != n * n:
            raise SystemFileError(f"{key} must have {n * n} entries in row-major order")
        flat = raw
    vals = [_number(v, f"{key}[{k // n + 1},{k % n + 1}]") for k, v in enumerate(flat)]
    return np.array(vals).reshape(n, n)


@dataclass(frozen=True)
class SystemFile:
    system: MarkovSystem
    geometry: dict | None
    path: str | None = None


def parse_system(text: str, name: str = "") -> SystemFile:
    try:
        data = json.loads(text, parse_constant=_reject_constant, parse_float=_finite_float)
    except json.JSONDecodeError as exc:
        raise SystemFileError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SystemFileError("top level must be an object")
    missing = [k for k in ("n", "p", "c", "q") if k not in data]
    if missing:
        raise SystemFileError(f"missing keys: {', '.join(missing)}")
    n = data["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise SystemFileError("n must be a positive integer")
    P = _matrix(data["p"], n, "p")
    C = _matrix(data["c"], n, "c")
    if not isinstance(data["q"], list) or len(data["q"]) != n:
        raise SystemFileError(f"q must be an array of {n} entries")
    q = np.array([_number(v, f"q[{k + 1}]") for k, v in enumerate(data["q"])])
    geometry = data.get("geometry")
    if geometry is not None and not isinstance(geometry, dict):
        raise SystemFileError("geometry must be an object")
    return SystemFile(MarkovSystem(P, C, q, name=data.get("name", name)), geometry)


def load_system(path) -> SystemFile:
    """Read a system file; ``OSError`` propagates for missing or unreadable files."""
    path = Path(path)
    parsed = parse_system(path.read_text(encoding="utf-8"), name=path.stem)
    return SystemFile(parsed.system, parsed.geometry, str(path))


def system_to_json(system: MarkovSystem, geometry: dict | None = None) -> str:
    """JSON text that :func:`parse_system` reads back to identical arrays."""
    data = {"name": system.name, "n": system.N, "p": system.P.tolist(),
            "c": system.C.tolist(), "q": system.q.tolist()}
    if geometry:
        data["geometry"] = geometry
    return json.dumps(data, indent=2) + "\n"


def format_value(x) -> str:
    """17 significant digits (round-trip safe); empty for ``None``; text unchanged."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_text(path, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def points_text(points) -> str:
    """One decimal point per line."""
    return "".join("%.17g\n" % float(x) for x in np.asarray(points, dtype=float).ravel())
