"""Pose math, cylinder meshing and zoom metaphor."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xctlab.errors import DegenerateFiberError
from xctlab.geometry import (
    IDENTITY_POSE,
    Pose6DoF,
    apply_pose,
    compose,
    cylinder_between,
    inverse,
    mesh_volume,
    pinch_scale,
    quat_from_axis_angle,
    quat_from_matrix,
    quat_to_matrix,
)

finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


def random_pose(rng):
    axis = rng.normal(size=3)
    angle = rng.uniform(0, 360)
    return Pose6DoF(
        rotation=tuple(quat_from_axis_angle(axis, angle)),
        translation=tuple(rng.uniform(-10, 10, 3)),
        scale=float(rng.uniform(0.2, 5.0)),
    )


class TestPose:
    def test_identity_application(self):
        p = np.array([1.0, 2.0, 3.0])
        np.testing.assert_allclose(apply_pose(IDENTITY_POSE, p), p)

    def test_compose_identity(self):
        rng = np.random.default_rng(1)
        p = random_pose(rng)
        for q in (compose(IDENTITY_POSE, p), compose(p, IDENTITY_POSE)):
            assert np.allclose(q.quaternion, p.quaternion, atol=1e-12)
            assert np.allclose(q.translation, p.translation, atol=1e-12)
            assert math.isclose(q.scale, p.scale)

    def test_compose_with_inverse_is_identity(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            p = random_pose(rng)
            ident = compose(p, inverse(p))
            assert np.allclose(ident.quaternion, [1, 0, 0, 0], atol=1e-9)
            assert np.allclose(ident.translation, [0, 0, 0], atol=1e-9)
            assert math.isclose(ident.scale, 1.0, rel_tol=1e-12)

    def test_hand_checked_composition(self):
        # Rotate 90 deg about z after translating (1,0,0): origin -> (0,1,0).
        rot = Pose6DoF(rotation=tuple(quat_from_axis_angle([0, 0, 1], 90)))
        trans = Pose6DoF(translation=(1.0, 0.0, 0.0))
        combined = compose(rot, trans)
        np.testing.assert_allclose(apply_pose(combined, [0.0, 0.0, 0.0]),
                                   [0.0, 1.0, 0.0], atol=1e-12)

    def test_compose_equals_sequential_application(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a, b = random_pose(rng), random_pose(rng)
            pts = rng.uniform(-5, 5, (7, 3))
            np.testing.assert_allclose(
                apply_pose(compose(a, b), pts),
                apply_pose(a, apply_pose(b, pts)),
                atol=1e-6,
            )

    def test_associativity(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            a, b, c = (random_pose(rng) for _ in range(3))
            lhs = compose(compose(a, b), c)
            rhs = compose(a, compose(b, c))
            pts = rng.uniform(-5, 5, (5, 3))
            np.testing.assert_allclose(apply_pose(lhs, pts), apply_pose(rhs, pts), atol=1e-6)

    def test_quaternion_normalized_on_construction(self):
        p = Pose6DoF(rotation=(2.0, 0.0, 0.0, 0.0))
        assert np.allclose(p.quaternion, [1, 0, 0, 0])
        with pytest.raises(ValueError):
            Pose6DoF(scale=0.0)

    def test_quat_matrix_roundtrip(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            q = quat_from_axis_angle(rng.normal(size=3), rng.uniform(0, 360))
            q2 = quat_from_matrix(quat_to_matrix(q))
            assert np.allclose(q, q2, atol=1e-9) or np.allclose(q, -q2, atol=1e-9)

    def test_pose_dict_roundtrip(self):
        rng = np.random.default_rng(6)
        p = random_pose(rng)
        q = Pose6DoF.from_dict(p.to_dict())
        assert np.allclose(p.quaternion, q.quaternion)
        assert p.translation == q.translation
        assert p.scale == q.scale


class TestPinchScale:
    def test_unchanged_when_distances_equal(self):
        assert pinch_scale(3.0, 3.0, 1.7) == 1.7

    def test_doubling(self):
        assert pinch_scale(1.0, 2.0, 1.0) == 2.0

    def test_clamp_high(self):
        assert pinch_scale(1.0, 1000.0, 1.0) == 50.0

    def test_clamp_low(self):
        assert pinch_scale(1000.0, 1.0, 1.0) == 0.05

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            pinch_scale(0.0, 1.0, 1.0)

    @given(
        d0=st.floats(0.01, 100, allow_nan=False),
        d1=st.floats(0.01, 100, allow_nan=False),
        s=st.floats(0.1, 10, allow_nan=False),
    )
    @settings(max_examples=100, deadline=None)
    def test_inverse_gesture_restores_scale(self, d0, d1, s):
        forward = s * (d1 / d0)
        if not (0.05 < forward < 50 and 0.05 < s < 50):
            return  # clamp engaged; invertibility not promised
        assert math.isclose(pinch_scale(d1, d0, pinch_scale(d0, d1, s)), s, rel_tol=1e-12)


class TestCylinderMesh:
    def test_axis_aligned_ring_positions(self):
        mesh = cylinder_between((0, 0, 0), (0, 0, 1), radius=1.0, segments=4)
        ring = mesh.vertices[:4]
        got = {tuple(np.round(v[:2], 6)) for v in ring}
        assert got == {(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)}
        assert np.allclose(ring[:, 2], 0.0)

    def test_triangle_count_contract(self):
        for segments in (3, 8, 32):
            mesh = cylinder_between((0, 0, 0), (1, 2, 3), 0.5, segments=segments)
            assert mesh.triangle_count == 4 * segments
            assert mesh.indices.min() >= 0
            assert mesh.indices.max() < len(mesh.vertices)

    def test_normals_unit_length(self):
        mesh = cylinder_between((1, 1, 1), (4, 5, 6), 0.7, segments=12)
        np.testing.assert_allclose(np.linalg.norm(mesh.normals, axis=1), 1.0, atol=1e-5)

    def test_side_vertices_on_axis_distance(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            start, end = rng.uniform(-5, 5, 3), rng.uniform(-5, 5, 3)
            if np.linalg.norm(end - start) < 1e-3:
                continue
            r = rng.uniform(0.1, 2.0)
            mesh = cylinder_between(start, end, r, segments=9)
            axis = (end - start) / np.linalg.norm(end - start)
            side = mesh.vertices[:18]
            rel = side - start
            dist = np.linalg.norm(rel - np.outer(rel @ axis, axis), axis=1)
            np.testing.assert_allclose(dist, r, atol=1e-6)

    def test_mesh_volume_against_closed_form(self):
        # Signed tetra volume vs pi r^2 L; 32-segment prism is within 5%.
        start, end, r = np.array([0.5, -1, 2]), np.array([3, 2, -1]), 0.8
        length = np.linalg.norm(end - start)
        mesh = cylinder_between(start, end, r, segments=32)
        vol = mesh_volume(mesh)
        assert vol > 0  # outward winding
        assert abs(vol - math.pi * r * r * length) / (math.pi * r * r * length) < 0.05

    def test_rotation_equivariance(self):
        rng = np.random.default_rng(9)
        start, end, r = np.array([1.0, 0, 0]), np.array([1.0, 0, 5.0]), 0.5
        pose = Pose6DoF(rotation=tuple(quat_from_axis_angle(rng.normal(size=3), 73)))
        mesh = cylinder_between(start, end, r, segments=16)
        rotated_inputs = cylinder_between(
            apply_pose(pose, start), apply_pose(pose, end), r, segments=16)
        # Same vertex set after transforming (ring phase may differ): compare
        # sorted distances to both endpoints, a rotation-invariant signature.
        def signature(mesh_, a, b):
            da = np.linalg.norm(mesh_.vertices - a, axis=1)
            db = np.linalg.norm(mesh_.vertices - b, axis=1)
            return np.sort(np.round(da, 5) + 1j * np.round(db, 5))
        sig1 = signature(rotated_inputs, apply_pose(pose, start), apply_pose(pose, end))
        sig2 = signature(mesh, start, end)
        np.testing.assert_allclose(sig1, sig2, atol=1e-4)

    def test_degenerate_fiber(self):
        with pytest.raises(DegenerateFiberError):
            cylinder_between((1, 1, 1), (1, 1, 1), 0.5)

    def test_payload_roundtrip(self):
        mesh = cylinder_between((0, 0, 0), (0, 0, 2), 1.0, segments=6, fiber_id=42)
        back = type(mesh).from_payload(mesh.to_payload())
        assert back.fiber_id == 42
        np.testing.assert_allclose(back.vertices, mesh.vertices, atol=1e-6)
        np.testing.assert_array_equal(back.indices, mesh.indices)
