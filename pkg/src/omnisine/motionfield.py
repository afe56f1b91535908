"""Sliding-window motion field between two panoramas."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy import ndimage

from .cylinder import PanoramaImage
from .fmi import DegenerateWindowError, register_window

CSV_HEADER = ("u_p", "du", "dv", "rotation", "scale", "response")
MIN_SAMPLES = 8
MIN_RESPONSE = 0.05


class InsufficientMotionError(RuntimeError):
    def __init__(self, msg="insufficient motion data"):
        super().__init__(msg)


@dataclass(frozen=True)
class MotionSample:
    u_p: float
    du: float
    dv: float
    rotation: float = 0.0
    scale: float = 1.0
    response: float = 1.0


@dataclass(frozen=True)
class MotionField:
    samples: tuple
    window: int
    step: int
    width: int
    height: int
    wrap: bool = False

    def __post_init__(self):
        u = [s.u_p for s in self.samples]
        if any(b <= a for a, b in zip(u, u[1:])):
            raise ValueError("sample columns must be strictly increasing")

    def __len__(self):
        return len(self.samples)

    def _col(self, name):
        return np.array([getattr(s, name) for s in self.samples], dtype=float)

    @property
    def u_p(self):
        return self._col("u_p")

    @property
    def du(self):
        return self._col("du")

    @property
    def dv(self):
        return self._col("dv")

    @property
    def response(self):
        return self._col("response")

    def with_shifts(self, du, dv) -> "MotionField":
        samples = tuple(replace(s, du=float(a), dv=float(b))
                        for s, a, b in zip(self.samples, du, dv))
        return replace(self, samples=samples)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for s in self.samples:
                writer.writerow([f"{getattr(s, k):.6f}" for k in CSV_HEADER])

    @classmethod
    def from_csv(cls, path, window=110, step=20, width=1100, height=110,
                 wrap=False) -> "MotionField":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_HEADER:
                raise ValueError(f"{Path(path).name}: unexpected CSV header")
            samples = tuple(MotionSample(**{k: float(row[k]) for k in CSV_HEADER})
                            for row in reader)
        return cls(samples, window, step, width, height, wrap)


def window_starts(width: int, window: int, step: int, wrap: bool = False):
    """First column of every window the sweep visits."""
    if wrap:
        return list(range(0, width, step))
    return list(range(0, width - window + 1, step))


def sweep(pano_1: PanoramaImage, pano_2: PanoramaImage, window: int = 110,
          step: int = 20, wrap: bool = False, row_offset: int = 0,
          min_response: float = MIN_RESPONSE, workers: int = 1) -> MotionField:
    """Register L x L windows slid along u and collect per-column shifts.

    A window spanning columns ``[k*d, k*d + L)`` is reported at its centre
    column ``k*d + (L - 1) / 2`` (pixel centres sit on integer columns).
    Windows that fail to register or whose response is below
    ``min_response`` are dropped.

    Raises:
        ValueError: mismatched panoramas or bad window geometry.
        InsufficientMotionError: fewer than 8 usable samples.
    """
    p1 = np.asarray(pano_1.pixels)
    p2 = np.asarray(pano_2.pixels)
    if p1.shape != p2.shape:
        raise ValueError(f"panorama sizes differ: {p1.shape} vs {p2.shape}")
    height, width = p1.shape
    if step < 1:
        raise ValueError("step must be >= 1")
    if window < 2 or row_offset < 0 or row_offset + window > height:
        raise ValueError(f"window of {window} rows at offset {row_offset} "
                         f"does not fit a panorama of height {height}")
    if window > width:
        raise ValueError("window wider than the panorama")

    rows = slice(row_offset, row_offset + window)
    starts = window_starts(width, window, step, wrap)

    def one(start):
        cols = np.arange(start, start + window) % width
        try:
            res = register_window(p1[rows][:, cols], p2[rows][:, cols])
        except DegenerateWindowError:
            return None
        if not (res.response >= min_response and np.isfinite(res.du)
                and np.isfinite(res.dv)):
            return None
        u_p = (start + (window - 1) / 2.0) % width
        return MotionSample(u_p, res.du, res.dv, res.rotation, res.scale,
                            res.response)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, starts))
    else:
        results = [one(s) for s in starts]
    samples = sorted((s for s in results if s is not None), key=lambda s: s.u_p)
    if len(samples) < MIN_SAMPLES:
        raise InsufficientMotionError()
    return MotionField(tuple(samples), window, step, width, height, wrap)


def median_filter(field: MotionField, k: int = 5) -> MotionField:
    """k-point sliding median of du and dv; edges replicate the end samples."""
    if k < 3 or k % 2 == 0:
        raise ValueError("median length must be odd and >= 3")
    if k > len(field):
        raise ValueError(f"median length {k} exceeds {len(field)} samples")
    du = ndimage.median_filter(field.du, size=k, mode="nearest")
    dv = ndimage.median_filter(field.dv, size=k, mode="nearest")
    return field.with_shifts(du, dv)
