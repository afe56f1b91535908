"""Text outputs: fixed-precision JSON and trajectory CSV files."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

DIGITS = 6
TRAJECTORY_HEADER = ("frame_a", "frame_b", "roll", "pitch", "yaw", "tz_scaled",
                     "txy_angle", "txy_mag_scaled", "runtime_s", "error")
POSE_KEYS = TRAJECTORY_HEADER[2:8]


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.{DIGITS}f}"
    return "0.000000" if s == "-0.000000" else s


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
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        # JSON has no NaN/inf literals
        return fmt(obj) if math.isfinite(obj) else "null"
    return json.dumps(str(obj))


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float printed to six fractional digits."""
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def write_trajectory(path, rows) -> None:
    """``rows`` are dicts keyed by :data:`TRAJECTORY_HEADER`."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_HEADER)
        for row in rows:
            writer.writerow([row["frame_a"], row["frame_b"]]
                            + [fmt(row[k]) for k in POSE_KEYS]
                            + [fmt(row["runtime_s"]), row.get("error", "")])


def write_truth(path, pairs) -> None:
    """``pairs`` holds ``(frame_a, frame_b, record)`` with pose keys in ``record``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("frame_a", "frame_b") + POSE_KEYS)
        for a, b, rec in pairs:
            writer.writerow([a, b] + [fmt(rec.get(k, 0.0)) for k in POSE_KEYS])


def read_table(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def read_angles(rows, path="table") -> np.ndarray:
    try:
        return np.array([[float(r["roll"]), float(r["pitch"]), float(r["yaw"])]
                         for r in rows], dtype=float).reshape(-1, 3)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: needs numeric roll, pitch and yaw columns") from exc
