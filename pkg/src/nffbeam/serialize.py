"""File formats: field-map CSV/JSON, excitation tables and JSON summaries.

CSV floats are written with 17 significant digits so a read-back
reproduces every double exactly. JSON keys are sorted so output files can
be diffed against golden copies.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, NffBeamError
from .field_engine import FieldMap

FIELD_COLUMNS = ("x_m", "y_m", "z_m", "re", "im", "abs")


class OutputError(NffBeamError, OSError):
    """Writing an artifact failed."""

    def __init__(self, path, cause: Exception):
        super().__init__(f"cannot write {path}: {cause}")
        self.path = str(path)


def fmt(x: float) -> str:
    return format(float(x), ".16e")


def _rows(fmap: FieldMap):
    pts = fmap.points()
    vals = fmap.values
    mags = np.abs(vals)
    for p, v, m in zip(pts, vals, mags):
        yield p[0], p[1], p[2], v.real, v.imag, m


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(path, exc) from exc


def dumps_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(obj, path) -> Path:
    path = Path(path)
    _write_text(path, dumps_json(obj))
    return path


def write_field_map(fmap: FieldMap, path, format: str = "csv") -> Path:
    """Write ``fmap`` as CSV (x_m,y_m,z_m,re,im,abs) or JSON."""
    if fmap.values.size == 0:
        raise InvalidInputError("refusing to write an empty field map")
    path = Path(path)
    if format == "csv":
        lines = [",".join(FIELD_COLUMNS)]
        lines.extend(",".join(fmt(v) for v in row) for row in _rows(fmap))
        _write_text(path, "\n".join(lines) + "\n")
    elif format == "json":
        grid = fmap.grid
        doc = {
            "columns": list(FIELD_COLUMNS),
            "frequency_hz": fmap.freq.f,
            "grid": {
                "kind": grid.kind,
                "counts": list(grid.counts),
                "origin": grid.origin.tolist(),
                "axes": [a.tolist() for a in grid.axes],
            },
            "layout_hash": fmap.layout_hash,
            "method": fmap.method,
            "rows": [[float(v) for v in row] for row in _rows(fmap)],
        }
        write_json(doc, path)
    else:
        raise InvalidInputError(f"unknown field map format {format!r}; expected 'csv' or 'json'")
    return path


def read_field_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a field CSV back as (points (N, 3), complex values (N,))."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != FIELD_COLUMNS:
            raise InvalidInputError(f"unexpected field CSV header {header}")
        data = np.array([[float(v) for v in row] for row in reader], dtype=float).reshape(-1, 6)
    return data[:, :3], data[:, 3] + 1j * data[:, 4]


def write_summary(summary: dict, path) -> Path:
    return write_json(summary, path)


def write_excitations_csv(rows: list[dict], path) -> Path:
    cols = ("target_index", "method", "element", "phase_rad", "normalized_phase_rad", "amplitude")
    lines = [",".join(cols)]
    for r in rows:
        lines.append(
            ",".join(
                [
                    str(r["target_index"]),
                    r["method"],
                    str(r["element"]),
                    fmt(r["phase_rad"]),
                    fmt(r["normalized_phase_rad"]),
                    fmt(r["amplitude"]),
                ]
            )
        )
    path = Path(path)
    _write_text(path, "\n".join(lines) + "\n")
    return path
