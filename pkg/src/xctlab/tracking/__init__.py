"""Fiducial marker tracking: dictionary, detection, planar pose."""

import json
from pathlib import Path

from ..errors import UnknownMarkerError
from .detect import Detection, detect_markers
from .dictionary import (
    MarkerDescriptor,
    MarkerDictionary,
    build_dictionary,
    encode_interior,
    full_grid,
)
from .pose import CameraIntrinsics, estimate_pose, homography_dlt, marker_corners_mm
from .synthetic import (
    frame_to_png,
    pose_from_euler,
    png_to_frame,
    render_marker_frame,
)


def resolve(marker_to_dataset: dict, marker_id: int) -> str:
    """Dataset id linked to a marker; several markers may share a dataset."""
    key = int(marker_id)
    if key not in marker_to_dataset:
        raise UnknownMarkerError(key)
    return marker_to_dataset[key]


def load_marker_links(path) -> dict:
    """Registry file: JSON object mapping marker id -> dataset id."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return {int(k): str(v) for k, v in raw.items()}


__all__ = [
    "CameraIntrinsics",
    "Detection",
    "MarkerDescriptor",
    "MarkerDictionary",
    "build_dictionary",
    "detect_markers",
    "encode_interior",
    "estimate_pose",
    "frame_to_png",
    "full_grid",
    "homography_dlt",
    "load_marker_links",
    "marker_corners_mm",
    "pose_from_euler",
    "png_to_frame",
    "render_marker_frame",
    "resolve",
]
