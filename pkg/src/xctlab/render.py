"""Software raycasting: maximum intensity projection and direct volume
rendering with a piecewise-linear transfer function.

Conventions (all documented so the tests can predict pixels exactly):

* Voxel ``(x, y, z)`` is centered at ``origin + (x, y, z) * spacing`` (mm).
  The renderable bounds are the hull of voxel centers; sampling outside it
  returns 0.
* The camera is a pinhole looking down its local ``-z`` with ``+y`` up;
  ``fov_deg`` is the vertical field of view.  Pixel (i, j) has i growing
  right and j growing down; rays pass through pixel centers.
* Sampling is fixed-step at ``0.5 * min(spacing)`` (model-space mm) unless
  overridden.  DVR applies opacity correction
  ``alpha' = 1 - (1 - alpha) ** (step / reference_step)`` and terminates a
  ray at accumulated alpha 0.99; the background is composited last.
* Output is rgba8 with a straight (gamma-naive) [0,1] -> 0..255 mapping, so
  identical inputs produce byte-identical images.
"""

from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import BadTFError
from .geometry import IDENTITY_POSE, Pose6DoF, compose, inverse, quat_from_matrix, quat_to_matrix
from .volume import Volume

DEFAULT_STEP_FACTOR = 0.5
OPACITY_CUTOFF = 0.99


@dataclass(frozen=True)
class Camera:
    """Pinhole camera; ``pose`` maps camera space to world space."""

    pose: Pose6DoF = IDENTITY_POSE
    fov_deg: float = 45.0
    near: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.fov_deg < 180.0:
            raise ValueError(f"fov must lie in (0, 180), got {self.fov_deg}")
        if not self.near > 0:
            raise ValueError("near must be positive")

    def to_dict(self) -> dict:
        return {"pose": self.pose.to_dict(), "fov_deg": self.fov_deg, "near": self.near}

    @classmethod
    def from_dict(cls, d: dict) -> "Camera":
        return cls(pose=Pose6DoF.from_dict(d.get("pose", {})),
                   fov_deg=float(d.get("fov_deg", 45.0)),
                   near=float(d.get("near", 0.1)))


def look_at(position, target, up=(0.0, 1.0, 0.0), fov_deg: float = 45.0,
            near: float = 0.1) -> Camera:
    """Camera positioned at ``position`` looking toward ``target``."""
    position = np.asarray(position, dtype=float)
    target = np.asarray(target, dtype=float)
    back = position - target
    n = np.linalg.norm(back)
    if n == 0:
        raise ValueError("camera position equals target")
    back /= n
    up = np.asarray(up, dtype=float)
    right = np.cross(up, back)
    rn = np.linalg.norm(right)
    if rn < 1e-12:
        # up parallel to view direction; pick another up
        up = np.array([0.0, 0.0, 1.0]) if abs(back[1]) > 0.9 else np.array([0.0, 1.0, 0.0])
        right = np.cross(up, back)
        rn = np.linalg.norm(right)
    right /= rn
    true_up = np.cross(back, right)
    rot = np.column_stack([right, true_up, back])
    pose = Pose6DoF(rotation=tuple(quat_from_matrix(rot)), translation=tuple(position))
    return Camera(pose=pose, fov_deg=fov_deg, near=near)


@dataclass(frozen=True)
class TransferFunction:
    """Piecewise-linear map from normalized intensity to rgba in [0, 1].

    Control points are (intensity, (r, g, b, a)); intensities must be
    strictly increasing with the first at 0 and the last at 1.
    """

    points: tuple[tuple[float, tuple[float, float, float, float]], ...]

    def __post_init__(self):
        pts = tuple((float(x), tuple(float(c) for c in rgba)) for x, rgba in self.points)
        if len(pts) < 2:
            raise BadTFError("need at least 2 control points")
        xs = [x for x, _ in pts]
        if xs[0] != 0.0 or xs[-1] != 1.0:
            raise BadTFError("control points must start at 0 and end at 1")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise BadTFError("control point intensities must be strictly increasing")
        for _, rgba in pts:
            if len(rgba) != 4 or any(not 0.0 <= c <= 1.0 for c in rgba):
                raise BadTFError("rgba components must lie in [0, 1]")
        object.__setattr__(self, "points", pts)

    def evaluate(self, intensities: np.ndarray) -> np.ndarray:
        """Vectorized evaluation; returns (..., 4)."""
        xs = np.array([x for x, _ in self.points])
        cols = np.array([rgba for _, rgba in self.points])
        flat = np.clip(np.asarray(intensities, dtype=float).ravel(), 0.0, 1.0)
        out = np.stack([np.interp(flat, xs, cols[:, c]) for c in range(4)], axis=-1)
        return out.reshape(np.shape(intensities) + (4,))

    def to_dict(self) -> dict:
        return {"points": [[x, list(rgba)] for x, rgba in self.points]}

    @classmethod
    def from_dict(cls, d: dict) -> "TransferFunction":
        try:
            pts = tuple((p[0], tuple(p[1])) for p in d["points"])
        except (KeyError, TypeError, IndexError):
            raise BadTFError("expected {'points': [[intensity, [r,g,b,a]], ...]}") from None
        return cls(points=pts)


GRAYSCALE_TF = TransferFunction(points=(
    (0.0, (0.0, 0.0, 0.0, 0.0)),
    (1.0, (1.0, 1.0, 1.0, 1.0)),
))


@dataclass(frozen=True)
class ImageRGBA:
    width: int
    height: int
    rgba: bytes = field(repr=False)

    def __post_init__(self):
        if len(self.rgba) != 4 * self.width * self.height:
            raise ValueError("rgba buffer length must be 4*width*height")

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.rgba, dtype=np.uint8).reshape(self.height, self.width, 4)

    def pixel(self, i: int, j: int) -> tuple[int, int, int, int]:
        return tuple(self.as_array()[j, i])

    def to_png(self) -> bytes:
        buf = io.BytesIO()
        Image.fromarray(self.as_array(), mode="RGBA").save(buf, format="PNG")
        return buf.getvalue()

    @classmethod
    def from_png(cls, data: bytes) -> "ImageRGBA":
        img = Image.open(io.BytesIO(data)).convert("RGBA")
        arr = np.asarray(img)
        return cls(width=img.width, height=img.height, rgba=arr.tobytes())

    def content_hash(self) -> str:
        return hashlib.sha256(self.rgba).hexdigest()

    @classmethod
    def from_float_array(cls, rgba: np.ndarray) -> "ImageRGBA":
        """Quantize a (h, w, 4) float [0,1] array with round-half-even."""
        q = np.rint(np.clip(rgba, 0.0, 1.0) * 255.0).astype(np.uint8)
        return cls(width=q.shape[1], height=q.shape[0], rgba=q.tobytes())


def sample_trilinear(volume: Volume, points: np.ndarray) -> np.ndarray:
    """Trilinear interpolation of normalized intensity at world-mm points.

    ``points`` is (..., 3); positions outside the voxel-center hull return 0.
    """
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    nx, ny, nz = volume.meta.dims
    spacing = np.asarray(volume.meta.spacing)
    origin = np.asarray(volume.meta.origin)

    t = (pts - origin) / spacing  # continuous voxel coords
    dims = np.array([nx, ny, nz], dtype=float)
    inside = np.all((t >= 0.0) & (t <= dims - 1.0), axis=-1)

    tc = np.clip(t, 0.0, dims - 1.0)
    i0 = np.minimum(tc.astype(int), (dims - 2).astype(int))
    i0 = np.maximum(i0, 0)
    f = tc - i0
    # For 1-voxel axes, i0 == 0 and i1 must stay 0.
    i1 = np.minimum(i0 + 1, (dims - 1).astype(int))

    data = volume.normalized
    x0, y0, z0 = i0[:, 0], i0[:, 1], i0[:, 2]
    x1, y1, z1 = i1[:, 0], i1[:, 1], i1[:, 2]
    fx, fy, fz = f[:, 0], f[:, 1], f[:, 2]

    c000 = data[z0, y0, x0]
    c100 = data[z0, y0, x1]
    c010 = data[z0, y1, x0]
    c110 = data[z0, y1, x1]
    c001 = data[z1, y0, x0]
    c101 = data[z1, y0, x1]
    c011 = data[z1, y1, x0]
    c111 = data[z1, y1, x1]

    c00 = c000 * (1 - fx) + c100 * fx
    c10 = c010 * (1 - fx) + c110 * fx
    c01 = c001 * (1 - fx) + c101 * fx
    c11 = c011 * (1 - fx) + c111 * fx
    c0 = c00 * (1 - fy) + c10 * fy
    c1 = c01 * (1 - fy) + c11 * fy
    out = (c0 * (1 - fz) + c1 * fz) * inside
    return float(out[0]) if single else out.reshape(np.asarray(points).shape[:-1])


def _pixel_rays(camera: Camera, width: int, height: int):
    """Ray origins/directions in world space through all pixel centers."""
    tan_half = math.tan(math.radians(camera.fov_deg) / 2.0)
    aspect = width / height
    i = (np.arange(width) + 0.5) / width * 2.0 - 1.0
    j = 1.0 - (np.arange(height) + 0.5) / height * 2.0
    u, v = np.meshgrid(i * tan_half * aspect, j * tan_half)
    dirs_cam = np.stack([u, v, -np.ones_like(u)], axis=-1)
    dirs_cam /= np.linalg.norm(dirs_cam, axis=-1, keepdims=True)
    rot = quat_to_matrix(camera.pose.quaternion)
    dirs_world = dirs_cam @ rot.T
    origin = np.asarray(camera.pose.translation)
    return origin, dirs_world.reshape(-1, 3)


def _slab_intersect(origins, dirs, bmin, bmax):
    """Ray/AABB slab test; returns (tmin, tmax) with tmax < tmin for misses."""
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / dirs
        t1 = (bmin - origins) * inv
        t2 = (bmax - origins) * inv
    tlo = np.where(np.isnan(t1), -np.inf, np.minimum(t1, t2))
    thi = np.where(np.isnan(t2), np.inf, np.maximum(t1, t2))
    # Parallel ray outside the slab on some axis: force a miss.
    parallel = dirs == 0.0
    outside = parallel & ((origins < bmin) | (origins > bmax))
    tmin = np.max(np.where(outside, np.inf, tlo), axis=-1)
    tmax = np.min(np.where(outside, -np.inf, thi), axis=-1)
    return tmin, tmax


def _ray_setup(volume: Volume, camera: Camera, width: int, height: int,
               model: Pose6DoF, step: float | None):
    """Transform pixel rays into model space and clip to the volume bounds."""
    cam_origin, dirs = _pixel_rays(camera, width, height)
    world_to_model = inverse(model)
    rot = quat_to_matrix(world_to_model.quaternion)
    o_model = np.asarray(
        world_to_model.scale * (rot @ cam_origin) + np.asarray(world_to_model.translation))
    d_model = dirs @ rot.T  # unit length: rotation only
    origin = np.asarray(volume.meta.origin)
    bmax = origin + (np.asarray(volume.meta.dims) - 1) * np.asarray(volume.meta.spacing)
    tmin, tmax = _slab_intersect(o_model[None, :], d_model, origin, bmax)
    near_model = camera.near * world_to_model.scale
    tmin = np.maximum(tmin, near_model)
    if step is None:
        step = DEFAULT_STEP_FACTOR * min(volume.meta.spacing)
    return o_model, d_model, tmin, tmax, step


def render_mip(volume: Volume, camera: Camera, width: int, height: int,
               model: Pose6DoF = IDENTITY_POSE, step: float | None = None,
               reverse: bool = False) -> ImageRGBA:
    """Maximum intensity projection to a grayscale rgba8 image.

    ``reverse=True`` marches the identical sample set far-to-near; because
    max is commutative the image must not change (tested invariant).
    """
    if width < 1 or height < 1:
        raise ValueError("image size must be at least 1x1")
    o, d, tmin, tmax, step = _ray_setup(volume, camera, width, height, model, step)
    n_rays = d.shape[0]
    best = np.zeros(n_rays)
    hit = tmax >= tmin
    if np.any(hit):
        counts = np.zeros(n_rays, dtype=int)
        counts[hit] = np.floor((tmax[hit] - tmin[hit]) / step).astype(int) + 1
        max_count = counts.max()
        for k in range(max_count):
            active = k < counts
            if not np.any(active):
                break
            idx = (counts[active] - 1 - k) if reverse else k
            t = tmin[active] + idx * step
            pts = o + t[:, None] * d[active]
            vals = sample_trilinear(volume, pts)
            best[active] = np.maximum(best[active], vals)
    gray = best.reshape(height, width)
    rgba = np.stack([gray, gray, gray, np.ones_like(gray)], axis=-1)
    return ImageRGBA.from_float_array(rgba)


def render_dvr(volume: Volume, tf: TransferFunction, camera: Camera,
               width: int, height: int, model: Pose6DoF = IDENTITY_POSE,
               step: float | None = None,
               background: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 1.0),
               ) -> ImageRGBA:
    """Front-to-back emission-absorption compositing through the volume."""
    if width < 1 or height < 1:
        raise ValueError("image size must be at least 1x1")
    reference_step = DEFAULT_STEP_FACTOR * min(volume.meta.spacing)
    o, d, tmin, tmax, step = _ray_setup(volume, camera, width, height, model, step)
    n_rays = d.shape[0]
    color = np.zeros((n_rays, 3))
    alpha = np.zeros(n_rays)
    hit = tmax >= tmin
    if np.any(hit):
        counts = np.zeros(n_rays, dtype=int)
        counts[hit] = np.floor((tmax[hit] - tmin[hit]) / step).astype(int) + 1
        max_count = counts.max()
        exponent = step / reference_step
        for k in range(max_count):
            active = (k < counts) & (alpha < OPACITY_CUTOFF)
            if not np.any(active):
                break
            t = tmin[active] + k * step
            pts = o + t[:, None] * d[active]
            vals = sample_trilinear(volume, pts)
            rgba = tf.evaluate(vals)
            a_corr = 1.0 - np.power(1.0 - rgba[:, 3], exponent)
            w = (1.0 - alpha[active]) * a_corr
            color[active] += w[:, None] * rgba[:, :3]
            alpha[active] += w
    bg = np.asarray(background, dtype=float)
    color += (1.0 - alpha)[:, None] * bg[:3] * bg[3]
    out_alpha = alpha + (1.0 - alpha) * bg[3]
    rgba = np.concatenate([color, out_alpha[:, None]], axis=1).reshape(height, width, 4)
    return ImageRGBA.from_float_array(rgba)


def project_point(camera: Camera, point, width: int, height: int) -> tuple[float, float]:
    """Pinhole projection of a world point to (i, j) pixel coordinates.

    Inverse of the ray construction; points behind the camera raise.
    """
    p = np.asarray(point, dtype=float)
    inv = inverse(camera.pose)
    rot = quat_to_matrix(inv.quaternion)
    pc = inv.scale * (rot @ p) + np.asarray(inv.translation)
    if pc[2] >= 0:
        raise ValueError("point is behind the camera")
    tan_half = math.tan(math.radians(camera.fov_deg) / 2.0)
    aspect = width / height
    u = (pc[0] / -pc[2]) / (tan_half * aspect)
    v = (pc[1] / -pc[2]) / tan_half
    i = (u + 1.0) / 2.0 * width - 0.5
    j = (1.0 - v) / 2.0 * height - 0.5
    return float(i), float(j)
