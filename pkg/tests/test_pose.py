import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omnisine.cylinder import CylinderModel
from omnisine.pose import (SMALL_ANGLE_WARNING, NotConvergedError, PoseEstimate,
                           euler_to_matrix, extract_pose, matrix_to_euler, rmse, rot_x,
                           rot_y, rot_z, to_rotation_matrix)
from omnisine.sinusoid import FitConfig, FitReport, SinusoidParams, fit
from omnisine.synth import RigidTransform, SceneDepth, predicted_shift

M = CylinderModel(1100, 110)
U = 54.5 + 20 * np.arange(50)


def pose_from_oracle(T, approximate=False, depth=None):
    du, dv = predicted_shift(T, U, depth=depth, model=M, approximate=approximate)
    fu = fit(np.column_stack([U, du]), M.gamma)
    fv = fit(np.column_stack([U, dv]), M.gamma)
    return extract_pose(fv, fu, M), fu, fv


def test_identity():
    pose, fu, fv = pose_from_oracle(RigidTransform())
    assert np.allclose(pose.angles, 0, atol=1e-9)
    assert pose.tz_scaled == pytest.approx(0, abs=1e-9)
    assert pose.txy_mag_scaled == pytest.approx(0, abs=1e-9)
    assert fu.degenerate and fv.degenerate


def test_pure_roll_example():
    T = RigidTransform.from_euler(roll=0.05)
    _, dv = predicted_shift(T, np.arange(1100.0), model=M)
    assert int(np.argmax(dv)) == pytest.approx(275, abs=2)
    assert int(np.argmin(dv)) == pytest.approx(825, abs=2)
    pose, _, fv = pose_from_oracle(T)
    assert fv.params.A == pytest.approx(0.05 * M.r, rel=1e-3)
    assert fv.params.A == pytest.approx(8.754, abs=0.01)
    assert pose.roll == pytest.approx(0.05, abs=0.002)
    assert abs(pose.pitch) < 0.002 and abs(pose.yaw) < 0.002


def test_pure_pitch_peaks_on_x_axis():
    T = RigidTransform.from_euler(pitch=0.05)
    _, dv = predicted_shift(T, np.arange(1100.0), model=M)
    assert min(int(np.argmin(dv)), 1100 - int(np.argmin(dv))) <= 2
    assert int(np.argmax(dv)) == pytest.approx(550, abs=2)
    pose, _, _ = pose_from_oracle(T)
    assert pose.pitch == pytest.approx(0.05, abs=0.002)
    assert abs(pose.roll) < 0.002


def test_one_column_yaw():
    pose, _, _ = pose_from_oracle(RigidTransform.from_euler(yaw=M.gamma))
    assert pose.yaw == pytest.approx(M.gamma, abs=1e-4)


@settings(max_examples=40, deadline=None)
@given(yaw=st.floats(-0.3, 0.3))
def test_yaw_linear_in_offset(yaw):
    pose = extract_pose(SinusoidParams(0, 0, 0), SinusoidParams(0, 0, -yaw * M.r), M)
    assert pose.yaw == pytest.approx(yaw, abs=1e-12)


SINGLE_AXIS = [
    ("roll", lambda x: RigidTransform.from_euler(roll=x), 0.1),
    ("pitch", lambda x: RigidTransform.from_euler(pitch=x), 0.1),
    ("yaw", lambda x: RigidTransform.from_euler(yaw=x), 0.1),
    ("tz", lambda x: RigidTransform(translation=(0, 0, x)), 0.02 * M.r),
    ("tx", lambda x: RigidTransform(translation=(x, 0, 0)), 0.02 * M.r),
    ("ty", lambda x: RigidTransform(translation=(0, x, 0)), 0.02 * M.r),
]


def driven(name, pose, lam):
    """Recovered value of the driving parameter in the units it was set in."""
    if name in ("roll", "pitch", "yaw"):
        return getattr(pose, name)
    if name == "tz":
        return pose.tz_scaled / lam
    sign = math.cos(pose.txy_angle) if name == "tx" else math.sin(pose.txy_angle)
    return sign * pose.txy_mag_scaled / lam


@pytest.mark.parametrize("name,make,limit", SINGLE_AXIS, ids=[s[0] for s in SINGLE_AXIS])
@settings(max_examples=15, deadline=None)
@given(frac=st.floats(0.1, 1.0), sign=st.sampled_from([-1, 1]))
def test_single_axis_roundtrip(name, make, limit, frac, sign):
    value = sign * frac * limit
    pose, _, _ = pose_from_oracle(make(value))
    lam = M.r / (10 * M.r)
    assert driven(name, pose, lam) == pytest.approx(value, rel=0.01)
    others = {"roll", "pitch", "yaw"} - {name}
    for other in others:
        assert abs(getattr(pose, other)) < 0.002
    if name not in ("tz",):
        assert abs(pose.tz_scaled) < 0.1
    if name not in ("tx", "ty"):
        assert pose.txy_mag_scaled < 0.1


@pytest.mark.parametrize("s", [0.25, 0.5, 2.0, 4.0])
def test_rotation_independent_of_translation_scale(s):
    R = RigidTransform.from_euler(0.03, -0.02, 0.04).rotation
    t = np.array([3.0, -2.0, 1.5])
    base, _, _ = pose_from_oracle(RigidTransform(R, t), approximate=True)
    scaled, _, _ = pose_from_oracle(RigidTransform(R, s * t), approximate=True)
    assert np.allclose(scaled.angles, base.angles, atol=1e-9)
    assert scaled.txy_mag_scaled == pytest.approx(s * base.txy_mag_scaled, rel=1e-9)
    # the exact geometry couples them only weakly
    base, _, _ = pose_from_oracle(RigidTransform(R, t))
    scaled, _, _ = pose_from_oracle(RigidTransform(R, s * t))
    assert np.allclose(scaled.angles, base.angles, atol=1e-3)


def test_translation_direction_and_lambda():
    depth = SceneDepth("constant", 20 * M.r)
    t = np.array([6.0, 4.0, -2.0])
    pose, _, _ = pose_from_oracle(RigidTransform(translation=t), depth=depth)
    lam = 1 / 20
    assert pose.txy_angle == pytest.approx(math.atan2(4, 6), abs=0.01)
    assert pose.txy_mag_scaled == pytest.approx(lam * math.hypot(6, 4), rel=0.01)
    assert pose.tz_scaled == pytest.approx(lam * -2, rel=0.01)
    assert pose.scale_resolved is False


def test_small_angle_warning():
    pose = extract_pose(SinusoidParams(0.4 / M.gamma, 0, 0), SinusoidParams(0, 0, 0), M)
    assert SMALL_ANGLE_WARNING in pose.warnings
    assert pose.roll == pytest.approx(0.4)
    quiet = extract_pose(SinusoidParams(0.1 / M.gamma, 0, 0), SinusoidParams(0, 0, 0), M)
    assert quiet.warnings == ()


def test_non_converged_fit_rejected():
    bad = FitReport(SinusoidParams(1, 0, 0), 200, 1.0, 0.1, converged=False)
    good = FitReport(SinusoidParams(1, 0, 0), 5, 1.0, 0.1, converged=True)
    with pytest.raises(NotConvergedError):
        extract_pose(bad, good, M)
    with pytest.raises(NotConvergedError):
        extract_pose(good, bad, M)


def test_elementary_rotation_matrix():
    c, s = math.cos(0.05), math.sin(0.05)
    assert np.allclose(rot_x(0.05), [[1, 0, 0], [0, c, -s], [0, s, c]])
    assert np.allclose(rot_y(0.05), [[c, 0, s], [0, 1, 0], [-s, 0, c]])
    assert np.allclose(rot_z(0.05), [[c, -s, 0], [s, c, 0], [0, 0, 1]])


@settings(max_examples=100, deadline=None)
@given(r=st.floats(-1, 1), p=st.floats(-1.5, 1.5), y=st.floats(-3, 3))
def test_rotation_matrix_properties(r, p, y):
    R = euler_to_matrix(r, p, y)
    assert np.allclose(R.T @ R, np.eye(3), atol=1e-12)
    assert np.linalg.det(R) == pytest.approx(1.0)
    assert np.allclose(euler_to_matrix(r, p, y) @ euler_to_matrix(r, p, y).T, np.eye(3))
    assert np.allclose(rot_x(r) @ rot_x(-r), np.eye(3), atol=1e-12)
    assert np.allclose(matrix_to_euler(R), (r, p, y), atol=1e-9)


def test_pose_to_matrix():
    pose = PoseEstimate(roll=0.1, pitch=-0.05, yaw=0.2)
    assert np.allclose(to_rotation_matrix(pose), rot_z(0.2) @ rot_y(-0.05) @ rot_x(0.1))


def test_rmse_examples():
    assert np.allclose(rmse([(0.01, 0, 0), (-0.01, 0, 0)], [(0, 0, 0)] * 2), [0.01, 0, 0])
    est = [PoseEstimate(0.2, 0.1, -0.1)] * 3
    assert np.allclose(rmse(est, [(0.2, 0.1, -0.1)] * 3), 0)
    with pytest.raises(ValueError):
        rmse([(0, 0, 0)], [])


def test_record_keys():
    rec = PoseEstimate(0.1).to_record(True, False)
    assert set(rec) == {"roll", "pitch", "yaw", "tz_scaled", "txy_angle",
                        "txy_mag_scaled", "converged_u", "converged_v", "warnings"}
    assert rec["converged_v"] is False
