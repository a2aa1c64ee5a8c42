"""Flat-file formats for curves, fields, paths and optimizer diagnostics.

Curve (JSON):       {"n": int, "points": [[x, y], ...]}
Field (CSV):        columns theta,value or theta,x,y; one row per grid point
Path (JSON):        {"m": int, "n": int, "frames": [[[x, y], ...], ...]}
Diagnostics (CSV):  iteration,energy,max_horizontality_residual,step_size
Operator (text):    header line n, then 2n rows of 2n floats
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .curve import DiscreteCurve, grid, make_curve
from .errors import FileFormatError, GridMismatch
from .linops import LinOp
from .paths import CurvePath

DIAGNOSTIC_COLUMNS = ("iteration", "energy", "max_horizontality_residual", "step_size")


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(data, dict):
        raise FileFormatError(f"{path}: expected a JSON object")
    return data


def _as_points(raw, where: str) -> np.ndarray:
    try:
        pts = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"{where}: points are not numeric pairs") from exc
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise FileFormatError(f"{where}: points must be a list of [x, y] pairs")
    return pts


def curve_from_dict(data: dict, scheme: str = "central", where: str = "curve") -> DiscreteCurve:
    if "points" not in data:
        raise FileFormatError(f"{where}: missing 'points'")
    pts = _as_points(data["points"], where)
    if "n" in data and int(data["n"]) != len(pts):
        raise FileFormatError(f"{where}: n={data['n']} but {len(pts)} points given")
    return make_curve(pts, scheme)


def curve_to_dict(c: DiscreteCurve) -> dict:
    return {"n": c.n, "points": c.points.tolist()}


def read_curve(path, scheme: str = "central") -> DiscreteCurve:
    return curve_from_dict(_load_json(path), scheme, where=str(path))


def write_curve(path, c: DiscreteCurve) -> None:
    with open(path, "w") as fh:
        json.dump(curve_to_dict(c), fh)


def read_field(path, n: int | None = None) -> np.ndarray:
    """Read a scalar (n,) or tangent (n, 2) field; the theta column is dropped.

    A header line is optional. When ``n`` is given the row count is checked.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(x.strip() for x in r)]
    if rows:
        try:
            [float(x) for x in rows[0]]
        except ValueError:
            rows = rows[1:]
    if not rows:
        raise FileFormatError(f"{path}: no data rows")
    try:
        data = np.array([[float(x) for x in r] for r in rows])
    except ValueError as exc:
        raise FileFormatError(f"{path}: non-numeric entry") from exc
    if data.ndim != 2 or data.shape[1] not in (2, 3):
        raise FileFormatError(f"{path}: expected columns theta,value or theta,x,y")
    if n is not None and data.shape[0] != n:
        raise GridMismatch(f"{path}: field has {data.shape[0]} rows, curve has n={n}")
    values = data[:, 1:]
    return values[:, 0] if values.shape[1] == 1 else values


def format_field(f: np.ndarray) -> str:
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["theta", "value"] if f.ndim == 1 else ["theta", "x", "y"]
    w.writerow(cols)
    vals = f[:, None] if f.ndim == 1 else f
    for t, row in zip(grid(n), vals):
        w.writerow([repr(float(t)), *(repr(float(x)) for x in row)])
    return buf.getvalue()


def write_field(path, f: np.ndarray) -> None:
    Path(path).write_text(format_field(f))


def path_to_dict(p: CurvePath) -> dict:
    return {"m": p.m, "n": p.n, "frames": p.points().tolist()}


def write_path(path, p: CurvePath) -> None:
    with open(path, "w") as fh:
        json.dump(path_to_dict(p), fh)


def read_path(path, scheme: str = "central") -> CurvePath:
    data = _load_json(path)
    try:
        frames = np.asarray(data["frames"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: missing or non-numeric 'frames'") from exc
    if frames.ndim != 3 or frames.shape[2] != 2:
        raise FileFormatError(f"{path}: frames must have shape (m, n, 2)")
    if frames.shape[:2] != (data.get("m", frames.shape[0]), data.get("n", frames.shape[1])):
        raise FileFormatError(f"{path}: header m/n disagrees with the frames")
    return CurvePath.from_points(frames, scheme)


def write_diagnostics(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=DIAGNOSTIC_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(r[k]) if isinstance(r[k], float) else r[k] for k in DIAGNOSTIC_COLUMNS})


def read_diagnostics(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{"iteration": int(r["iteration"]), **{k: float(r[k]) for k in DIAGNOSTIC_COLUMNS[1:]}}
            for r in rows]


def write_linop(path, op: LinOp) -> None:
    Path(path).write_text(op.to_text())


def read_linop(path, curve: DiscreteCurve) -> LinOp:
    try:
        return LinOp.from_text(Path(path).read_text(), curve)
    except (ValueError, IndexError) as exc:
        raise FileFormatError(f"{path}: not an operator dump") from exc
