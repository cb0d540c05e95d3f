"""Marker detection in grayscale frames.

Pipeline: adaptive threshold (local mean) -> connected dark components ->
convex-hull quad candidates -> corner refinement by intersecting total
least squares line fits of gray-level edge crossings -> perspective unwarp
of the 6x6 cell grid -> dictionary decode (<= 1 bit error, 4 rotations) ->
planar pose per detection.  At most one detection per id survives per
frame (fewest bit errors, then largest quad wins).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..errors import DegenerateCornersError
from ..geometry import Pose6DoF
from .dictionary import GRID, MarkerDictionary
from .pose import CameraIntrinsics, apply_homography, estimate_pose, homography_dlt

MIN_COMPONENT_AREA = 100
MIN_SIDE_PX = 8.0


@dataclass(frozen=True)
class Detection:
    marker_id: int
    corners: np.ndarray      # (4, 2) px, CCW in marker frame starting top-left
    pose: Pose6DoF           # marker-to-camera
    bit_errors: int
    reprojection_rms: float

    def to_dict(self) -> dict:
        return {
            "marker_id": self.marker_id,
            "corners": self.corners.tolist(),
            "pose": self.pose.to_dict(),
            "bit_errors": self.bit_errors,
            "reprojection_rms": self.reprojection_rms,
        }


def _bilinear(img: np.ndarray, pts: np.ndarray) -> np.ndarray:
    h, w = img.shape
    x = np.clip(pts[:, 0], 0.0, w - 1.0)
    y = np.clip(pts[:, 1], 0.0, h - 1.0)
    x0 = np.minimum(x.astype(int), w - 2)
    y0 = np.minimum(y.astype(int), h - 2)
    fx = x - x0
    fy = y - y0
    return (img[y0, x0] * (1 - fx) * (1 - fy) + img[y0, x0 + 1] * fx * (1 - fy)
            + img[y0 + 1, x0] * (1 - fx) * fy + img[y0 + 1, x0 + 1] * fx * fy)


def _adaptive_dark_mask(img: np.ndarray) -> np.ndarray:
    h, w = img.shape
    window = max(15, (min(h, w) // 4) | 1)
    local_mean = ndimage.uniform_filter(img, size=window, mode="nearest")
    return img < local_mean - 0.05


def _initial_quad(hull_pts: np.ndarray) -> np.ndarray | None:
    """Max-spread 4 corners from hull points (farthest-point heuristic)."""
    if len(hull_pts) < 4:
        return None
    c = hull_pts.mean(axis=0)
    i0 = int(np.argmax(np.linalg.norm(hull_pts - c, axis=1)))
    p0 = hull_pts[i0]
    i1 = int(np.argmax(np.linalg.norm(hull_pts - p0, axis=1)))
    p1 = hull_pts[i1]
    d = p1 - p0
    n = np.array([-d[1], d[0]])
    n_len = np.linalg.norm(n)
    if n_len < 1e-9:
        return None
    side = (hull_pts - p0) @ n / n_len
    if side.max() < 1.0 or side.min() > -1.0:
        return None
    p2 = hull_pts[int(np.argmax(side))]
    p3 = hull_pts[int(np.argmin(side))]
    quad = np.array([p0, p1, p2, p3], dtype=float)
    center = quad.mean(axis=0)
    order = np.argsort(np.arctan2(quad[:, 1] - center[1], quad[:, 0] - center[0]))
    return quad[order]  # ascending atan2 = clockwise on screen (y down)


def _refine_corners(img: np.ndarray, quad: np.ndarray, passes: int = 2) -> np.ndarray | None:
    """Subpixel corners: gray edge crossings fitted with TLS lines.

    A second pass re-centers the crossing profiles on the refined lines,
    removing the residual bias of anchoring on the binary boundary.
    """
    refined = quad
    for _ in range(passes):
        refined = _refine_corners_once(img, refined)
        if refined is None:
            return None
    return refined


def _refine_corners_once(img: np.ndarray, quad: np.ndarray) -> np.ndarray | None:
    lines = []
    for k in range(4):
        a, b = quad[k], quad[(k + 1) % 4]
        edge = b - a
        length = np.linalg.norm(edge)
        if length < MIN_SIDE_PX:
            return None
        tangent = edge / length
        normal = np.array([-tangent[1], tangent[0]])
        n_samples = max(10, int(length / 2))
        ts = np.linspace(0.15, 0.85, n_samples)
        base = a + ts[:, None] * edge
        offsets = np.linspace(-2.0, 2.0, 17)
        pts = base[:, None, :] + offsets[None, :, None] * normal
        profiles = _bilinear(img, pts.reshape(-1, 2)).reshape(len(ts), len(offsets))
        lo = profiles.min(axis=1)
        hi = profiles.max(axis=1)
        level = (lo + hi) / 2.0
        crossings = []
        for i in range(len(ts)):
            if hi[i] - lo[i] < 0.1:  # no real edge here
                continue
            row = profiles[i]
            sign = row >= level[i]
            flips = np.nonzero(sign[:-1] != sign[1:])[0]
            if len(flips) == 0:
                continue
            # Crossing closest to the coarse edge position (offset 0).
            j = flips[int(np.argmin(np.abs(offsets[flips] + 0.125)))]
            denom = row[j + 1] - row[j]
            frac = (level[i] - row[j]) / denom if abs(denom) > 1e-9 else 0.5
            off = offsets[j] + frac * (offsets[j + 1] - offsets[j])
            crossings.append(base[i] + off * normal)
        if len(crossings) < 4:
            return None
        pts_fit = np.asarray(crossings)
        centroid = pts_fit.mean(axis=0)
        _, _, vt = np.linalg.svd(pts_fit - centroid)
        direction = vt[0]
        lines.append((centroid, direction))

    corners = []
    for k in range(4):
        c1, d1 = lines[(k - 1) % 4]
        c2, d2 = lines[k]
        mat = np.column_stack([d1, -d2])
        if abs(np.linalg.det(mat)) < 1e-9:
            return None
        s = np.linalg.solve(mat, c2 - c1)
        corners.append(c1 + s[0] * d1)
    return np.asarray(corners)


def _convex(quad: np.ndarray) -> bool:
    signs = []
    for k in range(4):
        a, b, c = quad[k], quad[(k + 1) % 4], quad[(k + 2) % 4]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        signs.append(cross > 0)
    return all(signs) or not any(signs)


def _sample_grid(img: np.ndarray, quad: np.ndarray) -> np.ndarray | None:
    """Mean gray per marker cell via the quad -> [0, GRID]^2 homography."""
    square = np.array([[0.0, 0.0], [GRID, 0.0], [GRID, GRID], [0.0, GRID]])
    try:
        h = homography_dlt(square, quad)
    except DegenerateCornersError:
        return None
    taps = np.linspace(0.3, 0.7, 3)
    cells = np.empty((GRID, GRID))
    uu, vv = np.meshgrid(taps, taps)
    for row in range(GRID):
        for col in range(GRID):
            pts = np.column_stack([col + uu.ravel(), row + vv.ravel()])
            px = apply_homography(h, pts)
            cells[row, col] = _bilinear(img, px).mean()
    return cells


def detect_markers(frame: np.ndarray, intrinsics: CameraIntrinsics,
                   dictionary: MarkerDictionary) -> list[Detection]:
    """Find and decode all dictionary markers in a grayscale frame.

    ``frame`` is (h, w) float in [0, 1] or uint8; returns an empty list when
    nothing decodes.
    """
    img = np.asarray(frame, dtype=float)
    if img.ndim != 2:
        raise ValueError("frame must be a single-channel image")
    if img.max() > 1.5:
        img = img / 255.0
    h, w = img.shape
    if h < 32 or w < 32:
        return []

    dark = _adaptive_dark_mask(img)
    labels, n_labels = ndimage.label(dark, structure=np.ones((3, 3), dtype=int))
    if n_labels == 0:
        return []

    detections: dict[int, Detection] = {}
    slices = ndimage.find_objects(labels)
    for label_idx, slc in enumerate(slices, start=1):
        if slc is None:
            continue
        area = int(np.count_nonzero(labels[slc] == label_idx))
        if area < MIN_COMPONENT_AREA or area > 0.95 * h * w:
            continue
        mask = labels[slc] == label_idx
        filled = ndimage.binary_fill_holes(mask)
        boundary = filled & ~ndimage.binary_erosion(filled)
        ys, xs = np.nonzero(boundary)
        if len(xs) < 8:
            continue
        offset = np.array([slc[1].start, slc[0].start], dtype=float)
        pts = np.column_stack([xs, ys]).astype(float) + offset
        try:
            from scipy.spatial import ConvexHull

            hull = ConvexHull(pts)
            hull_pts = pts[hull.vertices]
        except Exception:
            continue
        quad = _initial_quad(hull_pts)
        if quad is None or not _convex(quad):
            continue
        refined = _refine_corners(img, quad)
        if refined is None or not _convex(refined):
            continue
        sides = np.linalg.norm(np.roll(refined, -1, axis=0) - refined, axis=1)
        if sides.min() < MIN_SIDE_PX:
            continue

        cells = _sample_grid(img, refined)
        if cells is None:
            continue
        lo, hi_v = cells.min(), cells.max()
        if hi_v - lo < 0.15:
            continue
        bits = cells > (lo + hi_v) / 2.0
        border = np.concatenate([bits[0], bits[-1], bits[:, 0], bits[:, -1]])
        if border.any():
            continue
        decoded = dictionary.decode(bits[1:-1, 1:-1])
        if decoded is None:
            continue
        marker_id, rot_k, errors = decoded

        # np.rot90(obs, k) == canonical puts the canonical top-left at
        # observed quad corner k; marker corners CCW (TL, BL, BR, TR) walk
        # the screen-clockwise quad backwards from there.
        idx = [rot_k % 4, (rot_k + 3) % 4, (rot_k + 2) % 4, (rot_k + 1) % 4]
        corners_marker = refined[idx]
        side_mm = dictionary.get(marker_id).side_mm
        try:
            pose, rms = estimate_pose(corners_marker, side_mm, intrinsics)
        except DegenerateCornersError:
            continue
        quad_area = 0.5 * abs(sum(
            corners_marker[k][0] * corners_marker[(k + 1) % 4][1]
            - corners_marker[(k + 1) % 4][0] * corners_marker[k][1]
            for k in range(4)))
        candidate = Detection(marker_id=marker_id, corners=corners_marker, pose=pose,
                              bit_errors=errors, reprojection_rms=rms)
        existing = detections.get(marker_id)
        if existing is None:
            detections[marker_id] = candidate
        else:
            old_area = 0.5 * abs(sum(
                existing.corners[k][0] * existing.corners[(k + 1) % 4][1]
                - existing.corners[(k + 1) % 4][0] * existing.corners[k][1]
                for k in range(4)))
            if (candidate.bit_errors, -quad_area) < (existing.bit_errors, -old_area):
                detections[marker_id] = candidate
    return sorted(detections.values(), key=lambda d: d.marker_id)
