"""Deterministic CSV / JSON output."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def format_value(v) -> str:
    """Text for one CSV cell: floats as %.17g (round-trip exact), bools as true/false."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if v == 0.0:
            return "0"  # also folds -0.0, which differs between otherwise identical runs
        return "%.17g" % v
    if v is None:
        return ""
    return str(v)


def write_csv(path, columns, rows) -> Path:
    """rows: iterable of dicts (keyed by column) or sequences (in column order)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            vals = [row.get(c) for c in columns] if isinstance(row, dict) else list(row)
            w.writerow([format_value(v) for v in vals])
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(path, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def trajectory_columns(labels) -> list[str]:
    cols = ["t"]
    for q in labels:
        tag = f"{q.n}_{q.l}_{q.m}"
        cols += [f"re_{tag}", f"im_{tag}"]
    return cols


def write_coefficient_trajectory(path, traj) -> Path:
    """Oracle trajectory: time plus (Re, Im) per basis state."""
    c = traj.coefficients
    body = np.empty((len(traj.times), 1 + 2 * c.shape[1]))
    body[:, 0] = traj.times
    body[:, 1::2] = c.real
    body[:, 2::2] = c.imag
    return write_csv(path, trajectory_columns(traj.labels), body.tolist())
