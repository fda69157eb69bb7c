"""Versioned documents for surfaces, markings and reports; atomic file output."""

from __future__ import annotations

import json
import math
import os
import tempfile
from typing import Any, Iterable, Sequence

from .coarse import CoarseMarking, PantsCurve
from .curves import Slope
from .flat import FlatTorus, SlitSurface, Surface

SCHEMA_VERSION = 1
TSV_DIGITS = 12


def _num(x: float) -> str:
    return "%.17g" % x


def _torus_doc(q: FlatTorus) -> dict:
    return {
        "basis": [[_num(x) for x in row] for row in q.basis],
        "scale": _num(q.scale),
        "time": _num(q.time),
    }


def surface_to_dict(q: Surface) -> dict:
    if isinstance(q, FlatTorus):
        return {"schema_version": SCHEMA_VERSION, "type": "torus", **_torus_doc(q)}
    return {
        "schema_version": SCHEMA_VERSION,
        "type": "slit",
        "big": _torus_doc(q.big),
        "small": _torus_doc(q.small),
        "slit": [_num(x) for x in q.slit],
        "rel_twist": q.rel_twist,
        "time": _num(q.time),
    }


def _torus_from(doc: dict) -> FlatTorus:
    basis = tuple(tuple(float(x) for x in row) for row in doc["basis"])
    return FlatTorus(basis, float(doc.get("scale", 1.0)), float(doc.get("time", 0.0)))


def surface_from_dict(doc: dict) -> Surface:
    try:
        version = doc.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {version!r}")
        kind = doc["type"]
        if kind == "torus":
            return _torus_from(doc)
        if kind == "slit":
            return SlitSurface(
                _torus_from(doc["big"]),
                _torus_from(doc["small"]),
                tuple(float(x) for x in doc["slit"]),
                int(doc.get("rel_twist", 0)),
                float(doc.get("time", 0.0)),
            )
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValueError(f"malformed surface document: {exc!r}") from exc
    raise ValueError(f"unknown surface type {kind!r}")


def load_surface(path: str) -> Surface:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    return surface_from_dict(doc)


def marking_to_dict(mu: CoarseMarking) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "topology": mu.topology,
        "pants": [
            {"id": p.id, "piece": p.piece, "slope": None if p.slope is None else str(p.slope),
             "ext": _num(p.ext), "twist": _num(p.twist)}
            for p in mu.pants
        ],
        "short": sorted(mu.short),
        "pieces": {k: str(v) for k, v in mu.pieces},
    }


def marking_from_dict(doc: dict) -> CoarseMarking:
    pants = tuple(
        PantsCurve(p["id"], p["piece"], None if p["slope"] is None else Slope.parse(p["slope"]),
                   float(p["ext"]), float(p["twist"]))
        for p in doc["pants"]
    )
    pieces = tuple((k, Slope.parse(v)) for k, v in doc["pieces"].items())
    return CoarseMarking(doc["topology"], pants, frozenset(doc["short"]), pieces)


# --- report values -------------------------------------------------------------


def clean(value: Any) -> Any:
    """Normalize a value for output: floats to 12 significant digits, slopes to p/q."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        return float(f"{value:.{TSV_DIGITS}g}")
    if isinstance(value, Slope):
        return str(value)
    if isinstance(value, dict):
        return {str(k): clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean(v) for v in value]
    if hasattr(value, "item"):  # numpy scalars
        return clean(value.item())
    return str(value)


def tsv_cell(value: Any) -> str:
    value = clean(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{TSV_DIGITS}g}"
    if isinstance(value, list):
        return ",".join(tsv_cell(v) for v in value)
    if isinstance(value, dict):
        return ",".join(f"{k}={tsv_cell(v)}" for k, v in value.items())
    return str(value)


def render_tsv(columns: Sequence[str], rows: Iterable[Sequence[Any]], comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append("\t".join(columns))
    lines.extend("\t".join(tsv_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def render_json(doc: Any) -> str:
    return json.dumps(clean(doc), indent=2, sort_keys=True) + "\n"


def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
