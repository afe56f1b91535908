"""Exact-geometry synthetic data for testing the estimator.

A :class:`RigidTransform` is the pose of camera 2 expressed in camera 1: a
point with coordinates ``P2`` in frame 2 has coordinates ``R @ P2 + t`` in
frame 1.  Panorama 2 is rendered from panorama 1 by lifting every
destination pixel to a scene point at the configured depth, mapping it into
frame 1, projecting centrally onto the cylinder and sampling there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial.transform import Rotation

from .cylinder import CylinderModel, PanoramaImage, cylinder_to_pano, pano_to_cylinder
from .pose import euler_to_matrix, matrix_to_euler


@dataclass(frozen=True)
class RigidTransform:
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if not np.allclose(R.T @ R, np.eye(3), atol=1e-9) or np.linalg.det(R) < 0:
            raise ValueError("rotation must be orthonormal with det +1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def from_euler(cls, roll=0.0, pitch=0.0, yaw=0.0, translation=(0, 0, 0)):
        return cls(euler_to_matrix(roll, pitch, yaw), translation)

    @classmethod
    def from_rotvec(cls, rotvec=(0, 0, 0), translation=(0, 0, 0)):
        return cls(Rotation.from_rotvec(np.asarray(rotvec, float)).as_matrix(),
                   translation)

    @property
    def euler(self) -> tuple:
        """(roll, pitch, yaw) of the rotation block."""
        return matrix_to_euler(self.rotation)

    def inverse(self) -> "RigidTransform":
        Rt = self.rotation.T
        return RigidTransform(Rt, -Rt @ self.translation)

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """``self`` after ``other``: x -> self(other(x))."""
        return RigidTransform(self.rotation @ other.rotation,
                              self.rotation @ other.translation + self.translation)

    def apply(self, points) -> np.ndarray:
        return np.asarray(points, float) @ self.rotation.T + self.translation


@dataclass(frozen=True)
class SceneDepth:
    """Horizontal distance of scene points from the camera axis, in pixels.

    ``values`` is a scalar for ``mode='constant'`` or one value per panorama
    column for ``mode='per-column'``.
    """

    mode: str = "constant"
    values: object = None

    @classmethod
    def default(cls, model: CylinderModel) -> "SceneDepth":
        return cls("constant", 10.0 * model.r)

    def at(self, u_p, model: CylinderModel) -> np.ndarray:
        if self.values is None:
            vals = np.full(np.shape(u_p), 10.0 * model.r)
        elif self.mode == "constant":
            vals = np.full(np.shape(u_p), float(self.values))
        elif self.mode == "per-column":
            table = np.asarray(self.values, dtype=float)
            if table.shape != (model.u_max,):
                raise ValueError("per-column depth needs one value per column")
            cols = np.round(np.asarray(u_p)).astype(int) % model.u_max
            vals = table[cols]
        else:
            raise ValueError(f"unknown depth mode {self.mode!r}")
        if np.any(vals <= model.r):
            raise ValueError("scene depth must exceed the cylinder radius")
        return vals


def make_texture(seed: int, model: CylinderModel, sigma: float = 2.0,
                 mean: float = 128.0, std: float = 40.0) -> PanoramaImage:
    """Band-limited random texture, seamless across the u wrap-around."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((model.v_max, model.u_max))
    field_ = ndimage.gaussian_filter(noise, sigma, mode=("reflect", "wrap"))
    field_ = (field_ - field_.mean()) / field_.std()
    return PanoramaImage(np.clip(mean + std * field_, 0.0, 255.0), model)


def _lift(u2, v2, depth: SceneDepth, model: CylinderModel) -> np.ndarray:
    P = pano_to_cylinder(u2, v2, model)
    scale = depth.at(u2, model) / model.r
    return P * np.asarray(scale)[..., None]


def source_coords(T: RigidTransform, u2, v2, depth: SceneDepth, model: CylinderModel):
    """Frame-1 panorama coordinates of the scene seen at (u2, v2) in frame 2.

    Returns ``(u1, v1, valid)``; rays that land on the cylinder axis are
    invalid.
    """
    P1 = T.apply(_lift(u2, v2, depth, model))
    rho = np.hypot(P1[..., 0], P1[..., 1])
    valid = rho > 1e-9 * model.r
    P1 = np.where(valid[..., None], P1, np.array([model.r, 0.0, 0.0]))
    u1, v1 = cylinder_to_pano(P1, model)
    return np.asarray(u1), np.asarray(v1), valid


def sample_bilinear(pixels: np.ndarray, u, v, wrap_u: bool = True) -> np.ndarray:
    """Bilinear lookup, cyclic in u (or clamped) and edge-clamped in v."""
    pixels = np.asarray(pixels, dtype=float)
    rows, cols = pixels.shape
    u = np.asarray(u, dtype=float)
    if not wrap_u:
        u = np.clip(u, 0.0, cols - 1.0)
    v = np.clip(np.asarray(v, dtype=float), 0.0, rows - 1.0)
    u0 = np.floor(u) if wrap_u else np.minimum(np.floor(u), max(cols - 2, 0))
    v0 = np.minimum(np.floor(v), rows - 2) if rows > 1 else np.zeros_like(v)
    fu = u - u0
    fv = v - v0
    c0 = u0.astype(int) % cols
    c1 = (c0 + 1) % cols if wrap_u else np.minimum(c0 + 1, cols - 1)
    r0 = v0.astype(int)
    r1 = np.minimum(r0 + 1, rows - 1)
    top = pixels[r0, c0] * (1 - fu) + pixels[r0, c1] * fu
    bot = pixels[r1, c0] * (1 - fu) + pixels[r1, c1] * fu
    return top * (1 - fv) + bot * fv


def resample_window(win, rotation: float = 0.0, scale: float = 1.0,
                    shift=(0.0, 0.0)) -> np.ndarray:
    """Rotate (from +u toward +v), magnify and shift a window about its centre.

    Output content at pixel ``x`` is the input at
    ``(R S)^-1 (x - c - shift) + c``.  Edge-clamped bilinear sampling.
    """
    win = np.asarray(win, dtype=float)
    n0, n1 = win.shape
    cv, cu = (n0 - 1) / 2.0, (n1 - 1) / 2.0
    v, u = np.mgrid[0:n0, 0:n1].astype(float)
    x = u - cu - shift[0]
    y = v - cv - shift[1]
    c, s = math.cos(rotation), math.sin(rotation)
    src_u = (c * x + s * y) / scale + cu
    src_v = (-s * x + c * y) / scale + cv
    return sample_bilinear(win, src_u, src_v, wrap_u=False)


def warp(pano: PanoramaImage, T: RigidTransform, depth: SceneDepth | None = None,
         model: CylinderModel | None = None) -> PanoramaImage:
    """Render what the camera sees after moving by ``T`` (inverse mapping)."""
    model = model or pano.model
    depth = depth or SceneDepth.default(model)
    v2, u2 = np.mgrid[0:model.v_max, 0:model.u_max].astype(float)
    u1, v1, valid = source_coords(T, u2, v2, depth, model)
    out = sample_bilinear(pano.pixels, u1, v1)
    out = np.where(valid, out, float(np.mean(pano.pixels)))
    return PanoramaImage(out, model)


def _wrap_du(du, model):
    return (np.asarray(du) + model.u_max / 2.0) % model.u_max - model.u_max / 2.0


def predicted_shift(T: RigidTransform, u_p, depth: SceneDepth | None = None,
                    model: CylinderModel | None = None, v_p=None,
                    approximate: bool = False):
    """Shift (du, dv) of the scene point seen at column ``u_p`` in frame 2.

    Exact by default (ray re-projection, no small-angle step).  With
    ``approximate=True`` the first-order closed forms are summed instead:
    ``du = -r*yaw + lam*(t_x sin - t_y cos)`` and
    ``dv = lam*t_z + r*(roll sin - pitch cos)`` with ``lam = r / depth``.
    ``v_p`` defaults to the middle row.
    """
    if model is None:
        raise ValueError("a CylinderModel is required")
    depth = depth or SceneDepth.default(model)
    u_p = np.asarray(u_p, dtype=float)
    v_p = np.full_like(u_p, model.height / 2.0) if v_p is None else np.asarray(v_p, float)
    if approximate:
        roll, pitch, yaw = T.euler
        tx, ty, tz = T.translation
        r = model.r
        lam = r / depth.at(u_p, model)
        th = u_p / r
        du = -r * yaw + lam * (tx * np.sin(th) - ty * np.cos(th))
        dv = lam * tz + r * (roll * np.sin(th) - pitch * np.cos(th))
    else:
        u1, v1, _ = source_coords(T, u_p, v_p, depth, model)
        du = _wrap_du(u_p - u1, model)
        dv = v_p - v1
    if np.ndim(du) == 0:
        return float(du), float(dv)
    return du, dv


def approximation_envelope(thetas, model: CylinderModel, n_cols: int = 720):
    """Worst exact-vs-approximate dv gap of a pure roll, relative to the amplitude.

    Evaluated on the middle row over ``n_cols`` evenly spaced columns.
    """
    u = np.linspace(0.0, model.u_max, n_cols, endpoint=False)
    out = []
    for th in thetas:
        T = RigidTransform.from_euler(roll=th)
        _, exact = predicted_shift(T, u, model=model)
        _, approx = predicted_shift(T, u, model=model, approximate=True)
        amp = abs(th) * model.r
        out.append(float(np.max(np.abs(exact - approx)) / amp) if amp else 0.0)
    return np.array(out)


@dataclass(frozen=True)
class Scenario:
    """Synthetic sequence description, usually read from a key=value file.

    Frame ``k`` is the base texture seen after ``k`` applications of the
    per-frame motion.  Only rotations compose exactly between consecutive
    frames; translated sequences re-use the constant depth for every frame.
    """

    seed: int = 0
    u_max: int = 1100
    v_max: int = 110
    rotation: tuple = (0.0, 0.0, 0.0)
    translation: tuple = (0.0, 0.0, 0.0)
    depth: float | None = None
    frames: int = 2
    texture_sigma: float = 2.0
    aspect_ratio: float = 1.0

    @property
    def model(self) -> CylinderModel:
        return CylinderModel(self.u_max, self.v_max, self.aspect_ratio)

    @property
    def transform(self) -> RigidTransform:
        return RigidTransform.from_rotvec(self.rotation, self.translation)

    @property
    def scene_depth(self) -> SceneDepth:
        if self.depth is None:
            return SceneDepth.default(self.model)
        return SceneDepth("constant", float(self.depth))

    @classmethod
    def from_file(cls, path) -> "Scenario":
        from . import config as kv

        cfg = kv.read_keyvalue(path)
        known = {"seed", "u_max", "v_max", "rotation", "translation", "depth",
                 "frames", "texture_sigma", "aspect_ratio"}
        unknown = set(cfg) - known
        if unknown:
            raise kv.ConfigError(f"unknown scenario keys: {sorted(unknown)}")
        depth = kv.get_float(cfg, "depth") if "depth" in cfg else None
        sc = cls(
            seed=kv.get_int(cfg, "seed", 0),
            u_max=kv.get_int(cfg, "u_max", 1100),
            v_max=kv.get_int(cfg, "v_max", 110),
            rotation=tuple(kv.get_vector(cfg, "rotation", 3, (0.0, 0.0, 0.0))),
            translation=tuple(kv.get_vector(cfg, "translation", 3, (0.0, 0.0, 0.0))),
            depth=depth,
            frames=kv.get_int(cfg, "frames", 2),
            texture_sigma=kv.get_float(cfg, "texture_sigma", 2.0),
            aspect_ratio=kv.get_float(cfg, "aspect_ratio", 1.0),
        )
        if sc.frames < 2:
            raise kv.ConfigError("frames must be >= 2")
        return sc

    def render(self) -> list:
        model = self.model
        base = make_texture(self.seed, model, sigma=self.texture_sigma)
        frames = [base]
        T, cum = self.transform, self.transform
        for _ in range(1, self.frames):
            frames.append(warp(base, cum, self.scene_depth, model))
            cum = cum.compose(T)
        return frames

    def truth(self) -> dict:
        """Ground-truth relative pose between consecutive frames."""
        T = self.transform
        roll, pitch, yaw = T.euler
        tx, ty, tz = T.translation
        depth = float(self.scene_depth.at(0.0, self.model))
        lam = self.model.r / depth
        return {
            "rotation_vector": list(self.rotation),
            "translation": list(self.translation),
            "roll": roll,
            "pitch": pitch,
            "yaw": yaw,
            "depth": depth,
            "lambda": lam,
            "tz_scaled": lam * tz,
            "txy_angle": math.atan2(ty, tx) if (tx or ty) else 0.0,
            "txy_mag_scaled": lam * math.hypot(tx, ty),
        }
