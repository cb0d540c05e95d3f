"""Planar pose recovery from marker corners.

Camera convention here is the usual computer-vision one: +z points out of
the camera into the scene, pixel u = fx * x/z + cx with image y down.  The
marker frame has x right, y up, z out of the board toward the viewer;
corners in marker coordinates run counter-clockwise starting top-left:
(-h, +h), (-h, -h), (+h, -h), (+h, +h) with h = side/2.

The homography is estimated with the normalized direct linear transform and
decomposed into rotation + translation by scaling the first two columns of
K^-1 H and re-orthonormalizing via SVD.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateCornersError
from ..geometry import Pose6DoF, quat_from_matrix, quat_to_matrix


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")

    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx],
                         [0.0, self.fy, self.cy],
                         [0.0, 0.0, 1.0]])

    def to_dict(self) -> dict:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy}

    @classmethod
    def from_dict(cls, d: dict) -> "CameraIntrinsics":
        return cls(fx=float(d["fx"]), fy=float(d["fy"]),
                   cx=float(d["cx"]), cy=float(d["cy"]))


def marker_corners_mm(side_mm: float) -> np.ndarray:
    """Corner coordinates in the marker plane, CCW starting top-left."""
    h = side_mm / 2.0
    return np.array([[-h, h], [-h, -h], [h, -h], [h, h]])


def _normalize_points(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    centroid = pts.mean(axis=0)
    shifted = pts - centroid
    mean_dist = np.mean(np.linalg.norm(shifted, axis=1))
    scale = np.sqrt(2.0) / mean_dist if mean_dist > 0 else 1.0
    t = np.array([[scale, 0, -scale * centroid[0]],
                  [0, scale, -scale * centroid[1]],
                  [0, 0, 1.0]])
    hom = np.column_stack([shifted * scale, np.ones(len(pts))])
    return hom, t


def homography_dlt(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Normalized DLT homography mapping src (N, 2) onto dst (N, 2), N >= 4."""
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    if len(src) < 4 or len(src) != len(dst):
        raise DegenerateCornersError("need at least 4 point correspondences")
    _assert_not_collinear(src)
    _assert_not_collinear(dst)
    src_h, t_src = _normalize_points(src)
    dst_h, t_dst = _normalize_points(dst)
    rows = []
    for (x, y, _), (u, v, _) in zip(src_h, dst_h):
        rows.append([-x, -y, -1, 0, 0, 0, u * x, u * y, u])
        rows.append([0, 0, 0, -x, -y, -1, v * x, v * y, v])
    a = np.asarray(rows)
    _, s, vt = np.linalg.svd(a)
    if s[-2] < 1e-10 * s[0]:
        raise DegenerateCornersError("correspondences do not determine a homography")
    h_norm = vt[-1].reshape(3, 3)
    h = np.linalg.inv(t_dst) @ h_norm @ t_src
    return h / h[2, 2]


def _assert_not_collinear(pts: np.ndarray) -> None:
    centered = pts - pts.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    if s[1] < 1e-8 * max(s[0], 1e-12):
        raise DegenerateCornersError("corner points are (near-)collinear")


def apply_homography(h: np.ndarray, pts: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(pts)
    hom = np.column_stack([pts, np.ones(len(pts))]) @ h.T
    return hom[:, :2] / hom[:, 2:3]


def estimate_pose(corners_px: np.ndarray, side_mm: float,
                  intrinsics: CameraIntrinsics) -> tuple[Pose6DoF, float]:
    """Marker-to-camera pose from 4 ordered corners.

    Returns (pose, corner reprojection RMS in px).  The recovered z is
    always positive (marker in front of the camera).
    """
    corners_px = np.asarray(corners_px, dtype=float)
    if corners_px.shape != (4, 2):
        raise DegenerateCornersError("expected 4 corner points")
    obj = marker_corners_mm(side_mm)
    h = homography_dlt(obj, corners_px)
    m = np.linalg.inv(intrinsics.matrix()) @ h
    m1, m2, m3 = m[:, 0], m[:, 1], m[:, 2]
    norm = (np.linalg.norm(m1) + np.linalg.norm(m2)) / 2.0
    if norm < 1e-12:
        raise DegenerateCornersError("degenerate homography")
    lam = 1.0 / norm
    if (lam * m3)[2] < 0:  # marker must sit in front of the camera
        lam = -lam
    r1, r2, t = lam * m1, lam * m2, lam * m3
    r3 = np.cross(r1, r2)
    rot_raw = np.column_stack([r1, r2, r3])
    u, _, vt = np.linalg.svd(rot_raw)
    rot = u @ np.diag([1.0, 1.0, np.linalg.det(u @ vt)]) @ vt
    pose = Pose6DoF(rotation=tuple(quat_from_matrix(rot)), translation=tuple(t), scale=1.0)
    rms = reprojection_rms(pose, side_mm, intrinsics, corners_px)
    return pose, rms


def project_marker_points(pose: Pose6DoF, points_mm: np.ndarray,
                          intrinsics: CameraIntrinsics) -> np.ndarray:
    """Project (N, 2) marker-plane points (z = 0) to pixels."""
    rot = quat_to_matrix(pose.quaternion)
    pts3 = np.column_stack([points_mm, np.zeros(len(points_mm))])
    cam = pts3 @ rot.T + np.asarray(pose.translation)
    if np.any(cam[:, 2] <= 0):
        raise ValueError("marker points behind the camera")
    k = intrinsics.matrix()
    proj = cam @ k.T
    return proj[:, :2] / proj[:, 2:3]


def reprojection_rms(pose: Pose6DoF, side_mm: float, intrinsics: CameraIntrinsics,
                     corners_px: np.ndarray) -> float:
    proj = project_marker_points(pose, marker_corners_mm(side_mm), intrinsics)
    return float(np.sqrt(np.mean(np.sum((proj - corners_px) ** 2, axis=1))))
