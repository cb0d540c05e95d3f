"""Synthetic cylinder phantoms with exact ground truth.

The phantom generator is both a test oracle and a CLI-facing utility: it
rasterizes straight cylinders into a voxel grid (a voxel is foreground when
its center lies within the cylinder radius of the axis segment) and emits
the matching ground-truth fiber table computed from the exact geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..fibertable import FiberRecord, FiberTable
from ..volume import Volume, from_array


@dataclass(frozen=True)
class CylinderSpec:
    """One straight cylinder in voxel coordinates (axis endpoints, radius)."""

    p0: tuple[float, float, float]
    p1: tuple[float, float, float]
    radius: float


def segment_point_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0:
        return np.linalg.norm(points - a, axis=-1)
    t = np.clip(((points - a) @ ab) / denom, 0.0, 1.0)
    closest = a + t[..., None] * ab
    return np.linalg.norm(points - closest, axis=-1)


def _inside_flat_cylinder(points: np.ndarray, a: np.ndarray, b: np.ndarray,
                          radius: float) -> np.ndarray:
    """Flat-capped cylinder membership: axial projection within [0, L] and
    radial distance within the radius (no end caps beyond the faces)."""
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0:
        return np.zeros(points.shape[:-1], dtype=bool)
    t = ((points - a) @ ab) / denom
    foot = a + t[..., None] * ab
    radial = np.linalg.norm(points - foot, axis=-1)
    return (t >= 0.0) & (t <= 1.0) & (radial <= radius)


def segment_segment_distance(a0, a1, b0, b1) -> float:
    """Minimum distance between two 3D segments (for overlap rejection)."""
    a0, a1, b0, b1 = (np.asarray(v, dtype=float) for v in (a0, a1, b0, b1))
    u = a1 - a0
    v = b1 - b0
    w = a0 - b0
    a = u @ u
    b = u @ v
    c = v @ v
    d = u @ w
    e = v @ w
    denom = a * c - b * b
    if denom > 1e-12:
        s = np.clip((b * e - c * d) / denom, 0.0, 1.0)
    else:
        s = 0.0
    t = (b * s + e) / c if c > 1e-12 else 0.0
    t = np.clip(t, 0.0, 1.0)
    # One reprojection pass keeps clamped endpoints consistent.
    if a > 1e-12:
        s = np.clip((b * t - d) / a, 0.0, 1.0)
    p = a0 + s * u
    q = b0 + t * v
    return float(np.linalg.norm(p - q))


def rasterize_cylinders(dims, cylinders, fg: int = 200, bg: int = 20,
                        dtype: str = "uint8", spacing=(1.0, 1.0, 1.0)) -> Volume:
    """Voxelize cylinders (coordinates in voxel units) onto a background."""
    nx, ny, nz = dims
    data = np.full((nz, ny, nx), bg, dtype=np.uint16)
    for cyl in cylinders:
        a = np.asarray(cyl.p0, dtype=float)
        b = np.asarray(cyl.p1, dtype=float)
        r = float(cyl.radius)
        lo = np.maximum(np.floor(np.minimum(a, b) - r - 1).astype(int), 0)
        hi = np.minimum(np.ceil(np.maximum(a, b) + r + 1).astype(int) + 1,
                        np.array([nx, ny, nz]))
        xs = np.arange(lo[0], hi[0])
        ys = np.arange(lo[1], hi[1])
        zs = np.arange(lo[2], hi[2])
        gz, gy, gx = np.meshgrid(zs, ys, xs, indexing="ij")
        pts = np.stack([gx, gy, gz], axis=-1).astype(float)
        inside = _inside_flat_cylinder(pts.reshape(-1, 3), a, b, r).reshape(gx.shape)
        region = data[lo[2]:hi[2], lo[1]:hi[1], lo[0]:hi[0]]
        region[inside] = fg
    return from_array(data.astype(np.uint8 if dtype == "uint8" else np.uint16),
                      dtype=dtype, spacing=spacing)


def ground_truth_record(fiber_id: int, cyl: CylinderSpec, spacing=(1.0, 1.0, 1.0)) -> FiberRecord:
    """Exact fiber record for a straight cylinder (voxel coords -> mm)."""
    sp = np.asarray(spacing, dtype=float)
    start = np.asarray(cyl.p0) * sp
    end = np.asarray(cyl.p1) * sp
    direction = end - start
    straight = float(np.linalg.norm(direction))
    if straight == 0:
        raise ValueError("degenerate cylinder")
    diameter = 2.0 * cyl.radius * float(np.min(sp))
    d = direction if direction[2] >= 0 else -direction
    theta = math.degrees(math.acos(min(1.0, abs(d[2]) / straight)))
    phi = math.degrees(math.atan2(d[1], d[0])) % 360.0
    cog = (start + end) / 2.0
    return FiberRecord(
        id=fiber_id,
        start_x=start[0], start_y=start[1], start_z=start[2],
        end_x=end[0], end_y=end[1], end_z=end[2],
        straight_length=straight,
        curved_length=straight,
        curvature_ratio=1.0,
        diameter=diameter,
        surface_area=math.pi * diameter * straight,
        volume=math.pi * (diameter / 2.0) ** 2 * straight,
        theta=theta,
        phi=phi,
        cog_x=cog[0], cog_y=cog[1], cog_z=cog[2],
        point_count=2,
        mean_tubularity=0.0,
    )


def ground_truth_table(cylinders, spacing=(1.0, 1.0, 1.0)) -> FiberTable:
    return FiberTable([ground_truth_record(i + 1, c, spacing)
                       for i, c in enumerate(cylinders)])


def random_cylinders(dims, count: int, radius_range=(2.0, 4.0),
                     length_range=(20.0, 60.0), seed: int = 0,
                     min_gap: float = 4.0, margin: float = 4.0,
                     max_tries: int = 20000) -> list[CylinderSpec]:
    """Non-overlapping random cylinders inside the grid.

    "Non-overlapping" is enforced with a surface clearance of ``min_gap``
    voxels (axis distance >= r_i + r_j + min_gap) so the single-scale
    analysis pipeline can separate neighbours; touching fibers are out of
    scope for the tracer.
    """
    rng = np.random.default_rng(seed)
    dims = np.asarray(dims, dtype=float)
    chosen: list[CylinderSpec] = []
    tries = 0
    while len(chosen) < count and tries < max_tries:
        tries += 1
        radius = rng.uniform(*radius_range)
        length = rng.uniform(*length_range)
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        lo = margin + radius
        hi = dims - 1 - margin - radius
        if np.any(hi <= lo):
            raise ValueError("volume too small for the requested cylinders")
        center = rng.uniform(lo, hi)
        half = direction * length / 2.0
        p0, p1 = center - half, center + half
        if np.any(p0 < lo) or np.any(p0 > hi) or np.any(p1 < lo) or np.any(p1 > hi):
            continue
        ok = True
        for other in chosen:
            dist = segment_segment_distance(p0, p1, other.p0, other.p1)
            if dist < radius + other.radius + min_gap:
                ok = False
                break
        if ok:
            chosen.append(CylinderSpec(p0=tuple(p0), p1=tuple(p1), radius=radius))
    if len(chosen) < count:
        raise ValueError(f"placed only {len(chosen)}/{count} cylinders after {max_tries} tries")
    return chosen


def random_phantom(dims, count: int, seed: int = 0, fg: int = 200, bg: int = 20,
                   radius_range=(2.0, 4.0), length_range=(20.0, 60.0),
                   spacing=(1.0, 1.0, 1.0), min_gap: float = 4.0):
    """Random phantom volume plus exact ground truth (seedable)."""
    cylinders = random_cylinders(dims, count, radius_range=radius_range,
                                 length_range=length_range, seed=seed, min_gap=min_gap)
    volume = rasterize_cylinders(dims, cylinders, fg=fg, bg=bg, spacing=spacing)
    return volume, ground_truth_table(cylinders, spacing=spacing)
