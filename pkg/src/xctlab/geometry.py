"""Rigid poses, cylinder meshes for fibers, and zoom math.

A :class:`Pose6DoF` is rotation (unit quaternion, scalar-first), translation
(mm) and a uniform positive scale.  Applying a pose to a point means
``R * (s * p) + t``; composition is defined so that
``apply(compose(a, b), p) == apply(a, apply(b, p))``.
"""

from __future__ import annotations

import base64
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFiberError

SCALE_MIN = 0.05
SCALE_MAX = 50.0


def _quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n == 0:
        raise ValueError("zero quaternion")
    q = q / n
    # Canonical sign: w >= 0 keeps serialized poses stable.
    if q[0] < 0:
        q = -q
    return q


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_axis_angle(axis, angle_deg: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0:
        raise ValueError("zero rotation axis")
    half = math.radians(angle_deg) / 2.0
    return _quat_normalize(np.concatenate([[math.cos(half)], math.sin(half) * axis / n]))


def quat_from_matrix(m: np.ndarray) -> np.ndarray:
    """Shepperd's method; ``m`` must be a proper rotation."""
    m = np.asarray(m, dtype=float)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0:
        s = math.sqrt(tr + 1.0) * 2
        w = 0.25 * s
        x = (m[2, 1] - m[1, 2]) / s
        y = (m[0, 2] - m[2, 0]) / s
        z = (m[1, 0] - m[0, 1]) / s
    elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
        w = (m[2, 1] - m[1, 2]) / s
        x = 0.25 * s
        y = (m[0, 1] + m[1, 0]) / s
        z = (m[0, 2] + m[2, 0]) / s
    elif m[1, 1] > m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
        w = (m[0, 2] - m[2, 0]) / s
        x = (m[0, 1] + m[1, 0]) / s
        y = 0.25 * s
        z = (m[1, 2] + m[2, 1]) / s
    else:
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
        w = (m[1, 0] - m[0, 1]) / s
        x = (m[0, 2] + m[2, 0]) / s
        y = (m[1, 2] + m[2, 1]) / s
        z = 0.25 * s
    return _quat_normalize(np.array([w, x, y, z]))


@dataclass(frozen=True)
class Pose6DoF:
    """Rotation + translation + uniform scale; quaternion is (w, x, y, z)."""

    rotation: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)
    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)
    scale: float = 1.0

    def __post_init__(self):
        q = _quat_normalize(np.asarray(self.rotation, dtype=float))
        object.__setattr__(self, "rotation", tuple(q))
        object.__setattr__(self, "translation", tuple(float(t) for t in self.translation))
        if not self.scale > 0:
            raise ValueError(f"pose scale must be positive, got {self.scale}")
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def quaternion(self) -> np.ndarray:
        return np.asarray(self.rotation)

    def matrix(self) -> np.ndarray:
        """Homogeneous 4x4 (rotation*scale | translation)."""
        m = np.eye(4)
        m[:3, :3] = quat_to_matrix(self.quaternion) * self.scale
        m[:3, 3] = self.translation
        return m

    def to_dict(self) -> dict:
        return {
            "rotation": list(self.rotation),
            "translation": list(self.translation),
            "scale": self.scale,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Pose6DoF":
        return cls(
            rotation=tuple(d.get("rotation", (1, 0, 0, 0))),
            translation=tuple(d.get("translation", (0, 0, 0))),
            scale=float(d.get("scale", 1.0)),
        )

    @classmethod
    def from_matrix(cls, rot: np.ndarray, translation, scale: float = 1.0) -> "Pose6DoF":
        return cls(rotation=tuple(quat_from_matrix(rot)), translation=tuple(translation),
                   scale=scale)


IDENTITY_POSE = Pose6DoF()


def apply_pose(pose: Pose6DoF, points: np.ndarray) -> np.ndarray:
    """Transform one point or an (N, 3) stack."""
    pts = np.asarray(points, dtype=float)
    rot = quat_to_matrix(pose.quaternion)
    return (pose.scale * pts) @ rot.T + np.asarray(pose.translation)


def compose(parent: Pose6DoF, child: Pose6DoF) -> Pose6DoF:
    """Pose such that applying it equals applying ``child`` then ``parent``."""
    q = quat_multiply(parent.quaternion, child.quaternion)
    t = apply_pose(parent, np.asarray(child.translation))
    return Pose6DoF(rotation=tuple(q), translation=tuple(t), scale=parent.scale * child.scale)


def inverse(pose: Pose6DoF) -> Pose6DoF:
    q_inv = quat_conjugate(pose.quaternion)
    s_inv = 1.0 / pose.scale
    rot_inv = quat_to_matrix(q_inv)
    t_inv = -s_inv * (rot_inv @ np.asarray(pose.translation))
    return Pose6DoF(rotation=tuple(q_inv), translation=tuple(t_inv), scale=s_inv)


def pinch_scale(d0: float, d1: float, scale: float) -> float:
    """Two-hand zoom metaphor: rescale by the hand-distance ratio, clamped.

    ``d0`` and ``d1`` are the grab distances before and after the gesture
    (or scroll-wheel equivalents); the result is clamped to
    [``SCALE_MIN``, ``SCALE_MAX``].
    """
    if d0 <= 0 or d1 <= 0:
        raise ValueError("pinch distances must be positive")
    return min(SCALE_MAX, max(SCALE_MIN, scale * (d1 / d0)))


@dataclass(frozen=True)
class CylinderMesh:
    """Closed triangulated cylinder for one fiber.

    Tessellation contract: ``segments`` side quads (two triangles each) plus
    one cap fan per end, so ``4 * segments`` triangles in total.  Side and
    cap rings are separate vertices so per-vertex normals stay exact.
    """

    vertices: np.ndarray = field(repr=False)  # (V, 3) float
    normals: np.ndarray = field(repr=False)   # (V, 3) unit
    indices: np.ndarray = field(repr=False)   # (T, 3) int
    fiber_id: int = 0

    @property
    def triangle_count(self) -> int:
        return len(self.indices)

    def to_payload(self) -> dict:
        """JSON/binary hybrid: base64 little-endian float32/uint32 buffers."""
        return {
            "fiber_id": int(self.fiber_id),
            "vertex_count": int(len(self.vertices)),
            "triangle_count": int(len(self.indices)),
            "positions_b64": base64.b64encode(
                self.vertices.astype("<f4").tobytes()).decode("ascii"),
            "normals_b64": base64.b64encode(
                self.normals.astype("<f4").tobytes()).decode("ascii"),
            "indices_b64": base64.b64encode(
                self.indices.astype("<u4").tobytes()).decode("ascii"),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "CylinderMesh":
        v = np.frombuffer(base64.b64decode(payload["positions_b64"]), dtype="<f4")
        n = np.frombuffer(base64.b64decode(payload["normals_b64"]), dtype="<f4")
        i = np.frombuffer(base64.b64decode(payload["indices_b64"]), dtype="<u4")
        return cls(
            vertices=v.reshape(-1, 3).astype(float),
            normals=n.reshape(-1, 3).astype(float),
            indices=i.reshape(-1, 3).astype(int),
            fiber_id=int(payload["fiber_id"]),
        )


def _axis_frame(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic perpendicular frame (u, v) for a unit axis.

    Reference vector is +z; when the axis is within ~2.5 degrees of +-z the
    fallback reference +x is used instead.
    """
    ref = np.array([0.0, 0.0, 1.0])
    if abs(float(np.dot(axis, ref))) > 0.999:
        ref = np.array([1.0, 0.0, 0.0])
    u = np.cross(ref, axis)
    u /= np.linalg.norm(u)
    v = np.cross(axis, u)
    return u, v


def cylinder_between(start, end, radius: float, segments: int = 16,
                     fiber_id: int = 0) -> CylinderMesh:
    """Closed cylinder from ``start`` to ``end`` with the given radius."""
    if segments < 3:
        raise ValueError("segments must be >= 3")
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    axis_vec = end - start
    length = np.linalg.norm(axis_vec)
    if length == 0:
        raise DegenerateFiberError(f"fiber {fiber_id}: start equals end")
    axis = axis_vec / length
    u, v = _axis_frame(axis)

    angles = 2.0 * np.pi * np.arange(segments) / segments
    ring_dirs = np.outer(np.cos(angles), u) + np.outer(np.sin(angles), v)  # (S, 3) unit radial

    bottom_ring = start + radius * ring_dirs
    top_ring = end + radius * ring_dirs

    # Vertex layout: side bottom [0,S), side top [S,2S), cap bottom [2S,3S),
    # cap top [3S,4S), bottom center 4S, top center 4S+1.
    vertices = np.vstack([bottom_ring, top_ring, bottom_ring, top_ring,
                          start[None, :], end[None, :]])
    normals = np.vstack([
        ring_dirs, ring_dirs,
        np.tile(-axis, (segments, 1)), np.tile(axis, (segments, 1)),
        -axis[None, :], axis[None, :],
    ])

    tris = []
    for k in range(segments):
        k1 = (k + 1) % segments
        # Side quad, outward winding (CCW seen from outside).
        tris.append((k, k1, segments + k1))
        tris.append((k, segments + k1, segments + k))
        # Bottom cap fan (faces -axis) and top cap fan (faces +axis).
        tris.append((4 * segments, 2 * segments + k1, 2 * segments + k))
        tris.append((4 * segments + 1, 3 * segments + k, 3 * segments + k1))
    return CylinderMesh(vertices=vertices, normals=normals,
                        indices=np.asarray(tris, dtype=int), fiber_id=fiber_id)


def fiber_to_cylinder(record, segments: int = 16) -> CylinderMesh:
    """Mesh a fiber record (straight chord from start to end, radius d/2)."""
    return cylinder_between(
        (record.start_x, record.start_y, record.start_z),
        (record.end_x, record.end_y, record.end_z),
        radius=record.diameter / 2.0,
        segments=segments,
        fiber_id=record.id,
    )


def mesh_volume(mesh: CylinderMesh) -> float:
    """Signed-tetrahedra volume of a closed mesh.

    Positive for consistently outward-wound triangles.
    """
    v = mesh.vertices
    t = mesh.indices
    a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    return float(np.sum(np.einsum("ij,ij->i", a, np.cross(b, c))) / 6.0)
