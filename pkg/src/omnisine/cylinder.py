"""Cylindrical camera model.

Panorama pixels are addressed by their centres: column ``i`` sits at
``u_p = i`` and row ``j`` at ``v_p = j``.  Column 0 looks along the camera
x-axis, column ``u_max / 4`` along the y-axis.  Row 0 is the top of the
cylinder (``z = H / 2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage


class GeometryError(ValueError):
    """Raised for invalid camera geometry or undefined projections."""


@dataclass(frozen=True)
class CylinderModel:
    """Calibrated cylinder with square pixels unless ``aspect_ratio`` says otherwise.

    Args:
        u_max: panorama width in pixels.
        v_max: panorama height in pixels (the cylinder height H).
        aspect_ratio: angle-per-pixel in v divided by angle-per-pixel in u.
    """

    u_max: int
    v_max: int
    aspect_ratio: float = 1.0

    def __post_init__(self):
        if self.u_max <= 0 or self.v_max <= 0:
            raise GeometryError("panorama dimensions must be positive")
        if not self.aspect_ratio > 0:
            raise GeometryError("aspect_ratio must be > 0")

    @property
    def gamma(self) -> float:
        """Opening angle of one pixel in radians."""
        return 2.0 * math.pi / self.u_max

    @property
    def r(self) -> float:
        """Cylinder radius in pixels (``1 / gamma``)."""
        return self.u_max / (2.0 * math.pi)

    @property
    def height(self) -> float:
        return float(self.v_max)


@dataclass(frozen=True)
class OmniImage:
    pixels: np.ndarray
    center_u: float
    center_v: float
    rho_min: float
    rho_max: float

    def __post_init__(self):
        if not 0 < self.rho_min < self.rho_max:
            raise GeometryError("annulus must satisfy 0 < rho_min < rho_max")
        rows, cols = np.shape(self.pixels)
        if not (0 <= self.center_u < cols and 0 <= self.center_v < rows):
            raise GeometryError("optical centre lies outside the omni image")


@dataclass(frozen=True)
class PanoramaImage:
    """Unwrapped grayscale panorama, ``v_max`` rows by ``u_max`` columns."""

    pixels: np.ndarray
    model: CylinderModel = field(compare=False)

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=float)
        if pixels.shape != (self.model.v_max, self.model.u_max):
            raise GeometryError(
                f"pixel grid {pixels.shape} does not match model "
                f"({self.model.v_max}, {self.model.u_max})")
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @classmethod
    def from_array(cls, pixels, aspect_ratio=1.0) -> "PanoramaImage":
        pixels = np.asarray(pixels, dtype=float)
        if pixels.ndim != 2 or 0 in pixels.shape:
            raise GeometryError("panorama must be a non-empty 2D array")
        rows, cols = pixels.shape
        return cls(pixels, CylinderModel(cols, rows, aspect_ratio))

    def columns(self, start: int, width: int) -> np.ndarray:
        """Columns ``start .. start + width - 1`` with cyclic wrap-around."""
        idx = np.arange(start, start + width) % self.model.u_max
        return self.pixels[:, idx]


def unwrap(omni: OmniImage, model: CylinderModel, flip_v: bool = False) -> PanoramaImage:
    """Cartesian-to-polar resampling of the mirror annulus onto the cylinder.

    Panorama column ``u`` samples the ray at angle ``gamma * u`` measured
    counter-clockwise (as displayed) from the +column direction of the omni
    image.  Row 0 samples the outer radius ``rho_max``; ``flip_v`` makes it
    the inner one.  Bilinear interpolation.
    """
    img = np.asarray(omni.pixels, dtype=float)
    rows, cols = img.shape
    cu, cv = omni.center_u, omni.center_v
    if (cu - omni.rho_max < 0 or cu + omni.rho_max > cols - 1
            or cv - omni.rho_max < 0 or cv + omni.rho_max > rows - 1):
        raise GeometryError("annulus exceeds the omni image bounds")

    angle = model.gamma * np.arange(model.u_max)
    frac = np.arange(model.v_max) / model.v_max
    if flip_v:
        frac = frac[::-1]
    rho = omni.rho_max - frac * (omni.rho_max - omni.rho_min)
    rr, aa = np.meshgrid(rho, angle, indexing="ij")
    col = cu + rr * np.cos(aa)
    row = cv - rr * np.sin(aa)
    pano = ndimage.map_coordinates(img, [row, col], order=1, mode="nearest")
    return PanoramaImage(pano, model)


def pano_to_cylinder(u_p, v_p, model: CylinderModel) -> np.ndarray:
    """Lift panorama coordinates onto the cylinder surface.

    Accepts scalars or arrays; the last axis of the result holds (x, y, z).
    """
    u_p = np.asarray(u_p, dtype=float)
    v_p = np.asarray(v_p, dtype=float)
    r = model.r
    theta = u_p / r
    z = (model.height / 2.0 - v_p) * model.aspect_ratio
    x, y, z = np.broadcast_arrays(r * np.cos(theta), r * np.sin(theta), z)
    return np.stack([x, y, z], axis=-1)


def cylinder_to_pano(P, model: CylinderModel):
    """Project 3D point(s) centrally onto the cylinder and return (u_p, v_p).

    Points need not lie on the cylinder: they are first scaled along the ray
    from the origin until ``x**2 + y**2 == r**2``.  ``u_p`` lands in
    ``[0, u_max)``.
    """
    P = np.asarray(P, dtype=float)
    x, y, z = P[..., 0], P[..., 1], P[..., 2]
    rho = np.hypot(x, y)
    if np.any(rho == 0):
        raise GeometryError("point on the cylinder axis has no azimuth")
    r = model.r
    u = np.mod(r * np.arctan2(y, x), model.u_max)
    # fold the rounding case mod() can return exactly u_max
    u = np.where(u >= model.u_max, 0.0, u)
    z_cyl = z * (r / rho)
    v = model.height / 2.0 - z_cyl / model.aspect_ratio
    if u.ndim == 0:
        return float(u), float(v)
    return u, v
