"""Fourier-Mellin registration of square image windows.

Translation comes from phase correlation; rotation and scale come from phase
correlating the log-polar resampled magnitude spectra.  All functions are
pure and deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

__all__ = [
    "DegenerateWindowError",
    "RegistrationResult",
    "phase_correlate",
    "register_window",
]

_EPS = 1e-12
# scale estimates outside this range are flagged with response 0
SCALE_RANGE = (0.5, 2.0)
# width of the spectral taper in cycles per pixel
TAPER_SIGMA = 0.08


class DegenerateWindowError(ValueError):
    """The window carries no usable spectral energy."""

    def __init__(self, msg="degenerate window"):
        super().__init__(msg)


@dataclass(frozen=True)
class RegistrationResult:
    """Motion of window B relative to window A.

    ``du``/``dv`` are the content displacement along columns/rows in pixels,
    ``rotation`` is counter-clockwise in the (u, v) frame in radians, and
    ``scale`` is the magnification of B relative to A.
    """

    du: float
    dv: float
    rotation: float = 0.0
    scale: float = 1.0
    response: float = 1.0


def _next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


@lru_cache(maxsize=16)
def _hann2d(n: int) -> np.ndarray:
    w = np.hanning(n + 2)[1:-1]
    out = np.outer(w, w)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=16)
def _spectral_taper(n: int) -> np.ndarray:
    # Gaussian taper on the cross-power spectrum; turns the correlation
    # peak into a smooth blob the 3-point fit can localise without bias.
    f = np.fft.fftfreq(n)
    g = np.exp(-0.5 * (f / TAPER_SIGMA) ** 2)
    out = np.outer(g, g)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=16)
def _highpass(n: int) -> np.ndarray:
    f = np.fft.fftshift(np.fft.fftfreq(n))
    x = np.outer(np.cos(np.pi * f), np.cos(np.pi * f))
    out = (1.0 - x) * (2.0 - x)
    out.setflags(write=False)
    return out


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"window shapes differ: {a.shape} vs {b.shape}")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("windows must be square 2D arrays")


def _parabolic(ym, y0, yp) -> float:
    denom = ym - 2.0 * y0 + yp
    if denom >= 0:
        return 0.0
    off = 0.5 * (ym - yp) / denom
    return float(min(0.5, max(-0.5, off)))


def _peak(corr: np.ndarray):
    """Integer peak plus per-axis 3-point parabolic refinement, cyclic."""
    n0, n1 = corr.shape
    i, j = np.unravel_index(int(np.argmax(corr)), corr.shape)
    y0 = corr[i, j]
    di = _parabolic(corr[(i - 1) % n0, j], y0, corr[(i + 1) % n0, j])
    dj = _parabolic(corr[i, (j - 1) % n1], y0, corr[i, (j + 1) % n1])
    pi_ = i if i < n0 // 2 else i - n0
    pj = j if j < n1 // 2 else j - n1
    return pi_ + di, pj + dj, float(y0)


def _spectrum(win: np.ndarray) -> np.ndarray:
    win = np.asarray(win, dtype=float)
    centred = win - win.mean()
    energy = float(np.sum(centred * centred))
    if not np.isfinite(energy) or energy <= _EPS * max(1.0, win.size):
        raise DegenerateWindowError()
    return np.fft.fft2(centred)


def _correlate_spectra(Fa: np.ndarray, Fb: np.ndarray, taper=True):
    cross = Fb * np.conj(Fa)
    mag = np.abs(cross)
    keep = mag > _EPS * mag.max()
    norm = np.zeros_like(cross)
    norm[keep] = cross[keep] / mag[keep]
    if taper:
        w = _spectral_taper(cross.shape[0])
        corr = np.fft.ifft2(norm * w).real / (w[keep].sum() / keep.size)
    else:
        corr = np.fft.ifft2(norm).real
    corr *= keep.size / max(1, int(keep.sum()))
    di, dj, peak = _peak(corr)
    return di, dj, float(min(1.0, max(0.0, peak)))


def phase_correlate(win_a, win_b):
    """Displacement of ``win_b`` relative to ``win_a`` by phase correlation.

    Both windows must be equal power-of-two squares.  The mean is removed
    first, so constant intensity offsets do not matter.

    Returns:
        tuple: ``(du, dv, response)`` with ``response`` in [0, 1].
    """
    a = np.asarray(win_a, dtype=float)
    b = np.asarray(win_b, dtype=float)
    _check_pair(a, b)
    n = a.shape[0]
    if n & (n - 1):
        raise ValueError("window side must be a power of two")
    di, dj, resp = _correlate_spectra(_spectrum(a), _spectrum(b))
    return dj, di, resp


def _pad(win: np.ndarray, size: int) -> np.ndarray:
    n = win.shape[0]
    if n == size:
        return win
    out = np.zeros((size, size))
    out[:n, :n] = win
    return out


def _apodize(win: np.ndarray, size: int) -> np.ndarray:
    win = np.asarray(win, dtype=float)
    return _pad((win - win.mean()) * _hann2d(win.shape[0]), size)


@lru_cache(maxsize=8)
def _logpolar_grid(n: int):
    """Sampling coordinates of an n x n log-polar grid on a centred spectrum."""
    log_base = math.log(n / 2.0) / (n - 1)
    radii = np.exp(log_base * np.arange(n))
    angles = np.pi * np.arange(n) / n
    rr, aa = np.meshgrid(radii, angles, indexing="ij")
    c = n / 2.0
    rows = c + rr * np.sin(aa)
    cols = c + rr * np.cos(aa)
    coords = np.array([rows, cols])
    coords.setflags(write=False)
    return coords, log_base


def _logpolar_spectrum(padded: np.ndarray) -> np.ndarray:
    n = padded.shape[0]
    mag = np.fft.fftshift(np.abs(np.fft.fft2(padded))) * _highpass(n)
    coords, _ = _logpolar_grid(n)
    return ndimage.map_coordinates(mag, coords, order=1, mode="constant")


def _similarity_warp(win: np.ndarray, rotation: float, scale: float) -> np.ndarray:
    """Rotate (from +u toward +v) and magnify a window about its centre."""
    n0, n1 = win.shape
    centre = np.array([(n0 - 1) / 2.0, (n1 - 1) / 2.0])
    c, s = math.cos(rotation), math.sin(rotation)
    # maps output (row, col) offsets to input offsets: (R S)^-1
    inv = np.array([[c, -s], [s, c]]) / scale
    offset = centre - inv @ centre
    return ndimage.affine_transform(win, inv, offset=offset, order=1, mode="nearest")


def _fourier_shift(win: np.ndarray, du: float, dv: float) -> np.ndarray:
    """Cyclically shift a window by a sub-pixel amount via its spectrum."""
    iu, iv = int(round(du)), int(round(dv))
    out = np.roll(win, (iv, iu), axis=(0, 1))
    fu, fv = du - iu, dv - iv
    if fu or fv:
        n0, n1 = win.shape
        ramp = np.exp(-2j * np.pi * (np.fft.fftfreq(n0)[:, None] * fv
                                     + np.fft.fftfreq(n1)[None, :] * fu))
        out = np.fft.ifft2(np.fft.fft2(out) * ramp).real
    return out


def _rotation_scale(pa: np.ndarray, pb: np.ndarray):
    n = pa.shape[0]
    lpa = _logpolar_spectrum(pa)
    lpb = _logpolar_spectrum(pb)
    di, dj, resp = _correlate_spectra(_spectrum(lpa), _spectrum(lpb))
    _, log_base = _logpolar_grid(n)
    # rows of the log-polar image are radii, columns are angles
    rotation = dj * math.pi / n
    scale = math.exp(-di * log_base)
    return rotation, scale, resp, (math.pi / n, log_base)


def register_window(win_a, win_b) -> RegistrationResult:
    """Full Fourier-Mellin registration of two equal square windows.

    Steps: Hann apodisation and zero padding to a power of two, high-pass
    weighted magnitude spectra, log-polar phase correlation for rotation and
    scale, de-rotation of ``win_b`` for both rotation candidates (theta and
    theta + pi), and a final phase correlation for the translation.  The
    candidate with the stronger translation peak wins; the reported response
    is the weaker of the two stages.
    """
    a = np.asarray(win_a, dtype=float)
    b = np.asarray(win_b, dtype=float)
    _check_pair(a, b)
    size = _next_pow2(a.shape[0])
    pa = _apodize(a, size)
    pb = _apodize(b, size)
    Fa = _spectrum(pa)
    _spectrum(pb)  # raises on a flat win_b

    rotation, scale, rs_resp, (ang_bin, log_bin) = _rotation_scale(pa, pb)
    negligible = (abs(rotation) < 0.25 * ang_bin
                  and abs(math.log(scale)) < 0.25 * log_bin)

    best = None
    for cand in (rotation, rotation + math.pi):
        if negligible:
            bb = b if cand == rotation else b[::-1, ::-1]
        else:
            bb = _similarity_warp(b, -cand, 1.0 / scale)
        di, dj, resp = _correlate_spectra(Fa, _spectrum(_apodize(bb, size)))
        if best is None or resp > best[4]:
            best = (cand, bb, dj, di, resp)
    cand, bb, du, dv, t_resp = best
    # second pass on the re-centred window removes the pull toward zero
    # that the fixed apodisation window puts on large shifts
    back = _fourier_shift(bb, -du, -dv)
    ddi, ddj, _ = _correlate_spectra(Fa, _spectrum(_apodize(back, size)))
    du += ddj
    dv += ddi
    cand = (cand + math.pi) % (2 * math.pi) - math.pi
    response = min(rs_resp, t_resp)
    # a shift beyond half the window leaves no common content to trust
    half = a.shape[0] / 2.0
    if not SCALE_RANGE[0] <= scale <= SCALE_RANGE[1] or max(abs(du), abs(dv)) > half:
        response = 0.0
    return RegistrationResult(float(du), float(dv), float(cand), float(scale),
                              float(response))
