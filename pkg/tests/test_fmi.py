import math

import numpy as np
import pytest
from scipy.stats import spearmanr

from omnisine.cylinder import CylinderModel
from omnisine.fmi import (SCALE_RANGE, DegenerateWindowError, phase_correlate,
                          register_window)
from omnisine.synth import make_texture, resample_window, sample_bilinear

L = 110


@pytest.fixture(scope="module")
def pano():
    return make_texture(7, CylinderModel(1100, 110)).pixels


def window(pano, start=300):
    return np.array(pano[:, start:start + L])


def test_identical_windows(pano):
    a = window(pano)
    res = register_window(a, a)
    assert abs(res.du) < 1e-9 and abs(res.dv) < 1e-9
    assert abs(res.rotation) < 1e-9
    assert res.scale == pytest.approx(1.0, abs=1e-9)
    assert res.response == pytest.approx(1.0, abs=1e-6)


def test_circular_shift_recovered(pano):
    a = window(pano)
    b = np.roll(a, (-3, 5), axis=(0, 1))
    res = register_window(a, b)
    assert round(res.du) == 5 and round(res.dv) == -3
    assert abs(res.du - 5) < 0.1 and abs(res.dv + 3) < 0.1


def test_phase_correlate_translation_only(pano):
    a = pano[:64, 200:264]
    b = np.roll(a, (4, -9), axis=(0, 1))
    du, dv, resp = phase_correlate(a, b)
    assert (round(du), round(dv)) == (-9, 4)
    assert 0 < resp <= 1


def test_phase_correlate_needs_power_of_two(pano):
    with pytest.raises(ValueError):
        phase_correlate(window(pano), window(pano))


def test_half_pixel_shift(pano):
    # content displaced by +0.5 px along u: frame 2 at u shows frame 1 at u - 0.5
    v, u = np.mgrid[0:L, 300:300 + L].astype(float)
    b = sample_bilinear(pano, u - 0.5, v)
    res = register_window(window(pano), b)
    assert 0.3 <= res.du <= 0.7
    assert abs(res.dv) < 0.2


@pytest.mark.parametrize("shift", [(0.25, 0.0), (-1.3, 0.7), (2.6, -1.4)])
def test_subpixel_shifts_accurate(pano, shift):
    v, u = np.mgrid[0:L, 300:300 + L].astype(float)
    b = sample_bilinear(pano, u - shift[0], v - shift[1])
    res = register_window(window(pano), b)
    assert res.du == pytest.approx(shift[0], abs=0.1)
    assert res.dv == pytest.approx(shift[1], abs=0.1)


def test_rotation_five_degrees(pano):
    a = window(pano)
    b = resample_window(a, rotation=math.radians(5))
    res = register_window(a, b)
    assert math.degrees(res.rotation) == pytest.approx(5.0, abs=0.5)
    assert res.scale == pytest.approx(1.0, abs=0.02)


def test_scale_ten_percent(pano):
    a = window(pano)
    b = resample_window(a, scale=1.1)
    res = register_window(a, b)
    assert res.scale == pytest.approx(1.1, abs=0.02)
    assert abs(math.degrees(res.rotation)) < 0.5


def test_combined_motion(pano):
    a = window(pano)
    b = resample_window(a, rotation=math.radians(-3), scale=0.95, shift=(4.0, -2.0))
    res = register_window(a, b)
    assert math.degrees(res.rotation) == pytest.approx(-3, abs=0.5)
    assert res.scale == pytest.approx(0.95, abs=0.02)
    assert res.du == pytest.approx(4.0, abs=0.5)
    assert res.dv == pytest.approx(-2.0, abs=0.5)


@pytest.mark.parametrize("start", [0, 250, 640, 980])
def test_swapping_inputs_negates_motion(pano, start):
    a = window(pano, start)
    b = resample_window(a, rotation=math.radians(2), scale=1.04, shift=(3.3, -1.2))
    f, r = register_window(a, b), register_window(b, a)
    assert f.du == pytest.approx(-r.du, abs=0.3)
    assert f.dv == pytest.approx(-r.dv, abs=0.3)
    assert math.degrees(f.rotation) == pytest.approx(-math.degrees(r.rotation), abs=0.5)
    assert f.scale == pytest.approx(1 / r.scale, rel=0.02)


def test_brightness_offset_invariance(pano):
    a = window(pano)
    b = np.roll(a, 3, axis=1)
    base = register_window(a, b)
    moved = register_window(a + 40.0, b - 25.0)
    assert moved.du == pytest.approx(base.du, abs=1e-6)
    assert moved.dv == pytest.approx(base.dv, abs=1e-6)


def test_constant_window_is_degenerate(pano):
    with pytest.raises(DegenerateWindowError, match="degenerate window"):
        register_window(np.full((L, L), 9.0), window(pano))


def test_mismatched_shapes_rejected(pano):
    with pytest.raises(ValueError):
        register_window(window(pano), pano[:64, :64])


@pytest.mark.parametrize("scale", [0.35, 2.6])
def test_scale_outside_range_has_zero_response(pano, scale):
    a = window(pano)
    res = register_window(a, resample_window(a, scale=scale))
    assert not (SCALE_RANGE[0] <= res.scale <= SCALE_RANGE[1])
    assert res.response == 0.0


def test_shift_beyond_half_window_has_zero_response():
    a = np.random.default_rng(3).normal(size=(32, 32))
    b = np.random.default_rng(4).normal(size=(32, 32))
    for seed in range(20):
        res = register_window(a, np.roll(b, seed, axis=1))
        assert abs(res.du) <= 16 and abs(res.dv) <= 16 or res.response == 0.0


def test_response_falls_with_noise(pano):
    a = window(pano)
    b = np.roll(a, 2, axis=1)
    sigmas, responses = [], []
    for seed in range(24):
        sigma = 5.0 * seed
        noise = np.random.default_rng(seed).normal(0, 1, a.shape) * sigma
        sigmas.append(sigma)
        responses.append(register_window(a, b + noise).response)
    rho, _ = spearmanr(sigmas, responses)
    assert rho < -0.9


def test_deterministic(pano):
    a = window(pano)
    b = resample_window(a, rotation=0.02, shift=(1.5, 0.5))
    r1, r2 = register_window(a, b), register_window(a.copy(), b.copy())
    assert r1 == r2
