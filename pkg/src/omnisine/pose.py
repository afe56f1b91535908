"""From two fitted sinusoids to a relative camera pose.

Conventions (checked against the exact-geometry oracle in ``synth``): a
rotation by ``theta`` about the in-plane axis at angle ``alpha`` from x gives
``dv(u) = theta * r * sin(gamma*u - alpha)``; yaw gives a constant
``du = -r * yaw``; an in-plane translation of direction ``beta`` gives
``du = lambda * |t_xy| * sin(gamma*u - beta)``; a z translation gives a
constant ``dv = lambda_z * t_z``.  Shifts are measured as position in frame 2
minus position in frame 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cylinder import CylinderModel
from .sinusoid import FitReport, SinusoidParams, wrap_angle

SMALL_ANGLE_LIMIT = 0.3
SMALL_ANGLE_WARNING = "outside small-angle validity"


class NotConvergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class PoseEstimate:
    """Relative pose; translation components carry an unknown scale."""

    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0
    tz_scaled: float = 0.0
    txy_angle: float = 0.0
    txy_mag_scaled: float = 0.0
    scale_resolved: bool = False
    warnings: tuple = field(default=())

    @property
    def angles(self) -> np.ndarray:
        return np.array([self.roll, self.pitch, self.yaw])

    def to_record(self, converged_u=True, converged_v=True) -> dict:
        return {
            "roll": self.roll,
            "pitch": self.pitch,
            "yaw": self.yaw,
            "tz_scaled": self.tz_scaled,
            "txy_angle": self.txy_angle,
            "txy_mag_scaled": self.txy_mag_scaled,
            "converged_u": bool(converged_u),
            "converged_v": bool(converged_v),
            "warnings": list(self.warnings),
        }


def axis_from_phase(phi: float) -> float:
    """Angle of the in-plane rotation axis from x, given the dv phase."""
    return float(wrap_angle(-phi))


def dir_from_phase(phi: float) -> float:
    """Direction of the in-plane translation from x, given the du phase."""
    return float(wrap_angle(-phi))


def _params(fit, label):
    if isinstance(fit, FitReport):
        if not fit.converged:
            raise NotConvergedError(f"{label} fit did not converge")
        return fit.params
    return fit


def extract_pose(fit_v, fit_u, model: CylinderModel) -> PoseEstimate:
    """Read rotation and scaled translation off the dv and du sinusoids.

    Accepts :class:`FitReport` (must be converged) or bare
    :class:`SinusoidParams` for each axis.
    """
    pv = _params(fit_v, "dv").canonical()
    pu = _params(fit_u, "du").canonical()
    gamma = model.gamma

    tilt = pv.A * gamma
    alpha = axis_from_phase(pv.phi) if pv.A > 0 else 0.0
    roll = tilt * math.cos(alpha)
    pitch = tilt * math.sin(alpha)
    yaw = -pu.B * gamma

    mag = pu.A
    angle = dir_from_phase(pu.phi) if mag > 0 else 0.0
    warnings = (SMALL_ANGLE_WARNING,) if tilt > SMALL_ANGLE_LIMIT else ()
    return PoseEstimate(roll, pitch, yaw, pv.B, angle, mag, False, warnings)


def rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_to_matrix(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``."""
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def matrix_to_euler(R) -> tuple:
    """Inverse of :func:`euler_to_matrix` (pitch in [-pi/2, pi/2])."""
    R = np.asarray(R, dtype=float)
    pitch = -math.asin(max(-1.0, min(1.0, R[2, 0])))
    roll = math.atan2(R[2, 1], R[2, 2])
    yaw = math.atan2(R[1, 0], R[0, 0])
    return roll, pitch, yaw


def to_rotation_matrix(pose: PoseEstimate) -> np.ndarray:
    return euler_to_matrix(pose.roll, pose.pitch, pose.yaw)


def rmse(estimates, truth) -> np.ndarray:
    """Per-axis (roll, pitch, yaw) root-mean-square error.

    ``estimates`` holds PoseEstimate objects or (roll, pitch, yaw) rows;
    ``truth`` holds (roll, pitch, yaw) rows.
    """
    est = np.array([e.angles if isinstance(e, PoseEstimate) else e
                    for e in estimates], dtype=float).reshape(-1, 3)
    ref = np.asarray(truth, dtype=float).reshape(-1, 3)
    if len(est) == 0 or len(est) != len(ref):
        raise ValueError(f"need equal non-empty series, got {len(est)} and {len(ref)}")
    return np.sqrt(np.mean((est - ref) ** 2, axis=0))
