"""Synthetic marker frames: the oracle for detection tests and the frame
source for desk-scale replay (stands in for the headset camera)."""

from __future__ import annotations

import math

import numpy as np

from ..geometry import Pose6DoF, quat_from_axis_angle, quat_multiply, quat_to_matrix
from .dictionary import GRID, MarkerDescriptor
from .pose import CameraIntrinsics

BLACK = 0.05
WHITE = 0.95
BACKGROUND = 0.55
QUIET_CELLS = 1.0  # white quiet zone around the marker, in cell widths


def marker_plane_color(descriptor: MarkerDescriptor, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Color of the marker board at marker-plane coords (mm); vectorized."""
    s = descriptor.side_mm
    half = s / 2.0
    cell = s / GRID
    quiet = half + QUIET_CELLS * cell
    out = np.full(x.shape, BACKGROUND)
    in_quiet = (np.abs(x) <= quiet) & (np.abs(y) <= quiet)
    out[in_quiet] = WHITE
    in_marker = (np.abs(x) < half) & (np.abs(y) < half)
    col = np.clip(((x + half) / cell).astype(int), 0, GRID - 1)
    row = np.clip(((half - y) / cell).astype(int), 0, GRID - 1)
    bits = descriptor.bits[row, col]
    out[in_marker] = np.where(bits[in_marker], WHITE, BLACK)
    return out


def render_marker_frame(descriptors_and_poses, intrinsics: CameraIntrinsics,
                        width: int, height: int, supersample: int | None = None) -> np.ndarray:
    """Grayscale float frame of planar markers under known poses.

    ``descriptors_and_poses`` is a list of (MarkerDescriptor, Pose6DoF
    marker-to-camera).  Later markers paint over earlier ones; pixels are
    anti-aliased by ``supersample``^2 subsamples (default: adaptive, denser
    for small apparent sizes).  Supersampling only runs inside each board's
    projected bounding box, so large frames stay cheap.
    """
    frame = np.full((height, width), BACKGROUND)
    k = intrinsics.matrix()
    for descriptor, pose in descriptors_and_poses:
        rot = quat_to_matrix(pose.quaternion)
        t = np.asarray(pose.translation)
        h = k @ np.column_stack([rot[:, 0], rot[:, 1], t])
        board = descriptor.side_mm / 2.0 + QUIET_CELLS * descriptor.side_mm / GRID
        corners = np.array([[-board, -board], [board, -board],
                            [board, board], [-board, board]])
        cam = np.column_stack([corners, np.zeros(4)]) @ rot.T + t
        if np.any(cam[:, 2] <= 0):
            continue  # board not fully in front of the camera
        px = (cam @ k.T)
        px = px[:, :2] / px[:, 2:3]
        x0 = max(0, int(np.floor(px[:, 0].min())) - 2)
        x1 = min(width, int(np.ceil(px[:, 0].max())) + 3)
        y0 = max(0, int(np.floor(px[:, 1].min())) - 2)
        y1 = min(height, int(np.ceil(px[:, 1].max())) + 3)
        if x1 <= x0 or y1 <= y0:
            continue
        if supersample is None:
            bbox = max(x1 - x0, y1 - y0)
            ss = int(np.clip(round(1400 / bbox), 4, 10))
        else:
            ss = supersample

        h_inv = np.linalg.inv(h)
        us = x0 + (np.arange((x1 - x0) * ss) + 0.5) / ss - 0.5
        vs = y0 + (np.arange((y1 - y0) * ss) + 0.5) / ss - 0.5
        uu, vv = np.meshgrid(us, vs)
        denom = h_inv[2, 0] * uu + h_inv[2, 1] * vv + h_inv[2, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            mx = (h_inv[0, 0] * uu + h_inv[0, 1] * vv + h_inv[0, 2]) / denom
            my = (h_inv[1, 0] * uu + h_inv[1, 1] * vv + h_inv[1, 2]) / denom
        color = marker_plane_color(descriptor, mx, my)
        on_board = (np.abs(mx) <= board) & (np.abs(my) <= board) & np.isfinite(mx)
        z = rot[2, 0] * mx + rot[2, 1] * my + t[2]
        visible = on_board & (z > 0)
        sub = np.where(visible, color, np.nan)
        tile = sub.reshape(y1 - y0, ss, x1 - x0, ss)
        coverage = np.isfinite(tile).sum(axis=(1, 3)) / (ss * ss)
        painted = np.nansum(np.where(np.isfinite(tile), tile, 0.0), axis=(1, 3)) / (ss * ss)
        region = frame[y0:y1, x0:x1]
        frame[y0:y1, x0:x1] = painted + (1.0 - coverage) * region
    return frame


def pose_from_euler(distance_mm: float, tilt_deg: float = 0.0, tilt_axis=(1.0, 0.0, 0.0),
                    roll_deg: float = 0.0, offset_mm=(0.0, 0.0)) -> Pose6DoF:
    """Marker-to-camera pose at a distance with tilt about an in-plane axis.

    A fronto-parallel marker faces the camera: its +z (out of the board)
    must point back toward the camera, i.e. along -z of the camera frame.
    """
    face_camera = quat_from_axis_angle([1.0, 0.0, 0.0], 180.0)
    roll = quat_from_axis_angle([0.0, 0.0, 1.0], roll_deg)
    tilt = quat_from_axis_angle(tilt_axis, tilt_deg)
    q = quat_multiply(tilt, quat_multiply(face_camera, roll))
    return Pose6DoF(rotation=tuple(q),
                    translation=(offset_mm[0], offset_mm[1], distance_mm), scale=1.0)


def frame_to_png(frame: np.ndarray) -> bytes:
    from PIL import Image
    import io

    img = Image.fromarray(np.rint(np.clip(frame, 0, 1) * 255).astype(np.uint8), mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def png_to_frame(data: bytes) -> np.ndarray:
    from PIL import Image
    import io

    img = Image.open(io.BytesIO(data)).convert("L")
    return np.asarray(img, dtype=float) / 255.0
