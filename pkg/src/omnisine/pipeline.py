"""End-to-end pairwise pose estimation."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .cylinder import PanoramaImage
from .motionfield import MotionField, median_filter, sweep
from .pose import PoseEstimate, extract_pose
from .sinusoid import FitConfig, FitReport, fit


@dataclass(frozen=True)
class RunConfig:
    window: int = 110
    step: int = 20
    delta: float = 2.0
    median: int = 5
    wrap: bool = False
    flip_v: bool = False
    huber_form: str = "unit"
    row_offset: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.median and (self.median < 3 or self.median % 2 == 0):
            raise ValueError("median length must be an odd integer >= 3 (or 0 to disable)")

    @property
    def fit_config(self) -> FitConfig:
        return FitConfig(delta=self.delta, huber_form=self.huber_form)


@dataclass(frozen=True)
class PairResult:
    pose: PoseEstimate
    raw_field: MotionField
    field: MotionField
    fit_u: FitReport
    fit_v: FitReport
    runtime: float

    def to_record(self) -> dict:
        rec = self.pose.to_record(self.fit_u.converged, self.fit_v.converged)
        rec["fit"] = {"u": self.fit_u.to_dict(), "v": self.fit_v.to_dict()}
        rec["samples"] = len(self.field)
        rec["runtime_s"] = self.runtime
        return rec


def fit_field(field: MotionField, omega: float, config: FitConfig):
    """Fit du and dv of a motion field; returns ``(fit_u, fit_v)``."""
    u = field.u_p
    fit_u = fit(np.column_stack([u, field.du]), omega, config)
    fit_v = fit(np.column_stack([u, field.dv]), omega, config)
    return fit_u, fit_v


def estimate_pair(pano_1: PanoramaImage, pano_2: PanoramaImage,
                  config: RunConfig = RunConfig()) -> PairResult:
    """Sweep, median-filter, fit both axes and extract the pose.

    Raises:
        InsufficientMotionError, FitError, NotConvergedError
    """
    t0 = time.perf_counter()
    raw = sweep(pano_1, pano_2, config.window, config.step, config.wrap,
                config.row_offset, workers=config.workers)
    field = median_filter(raw, config.median) if config.median else raw
    fit_u, fit_v = fit_field(field, pano_1.model.gamma, config.fit_config)
    pose = extract_pose(fit_v, fit_u, pano_1.model)
    return PairResult(pose, raw, field, fit_u, fit_v, time.perf_counter() - t0)
