"""Tubularity response and phantom-driven tracing."""

import math

import numpy as np
import pytest

from xctlab.extraction import (
    CylinderSpec,
    ExtractionConfig,
    FiberTrace,
    characterize,
    extract_fibers,
    rasterize_cylinders,
    trace_fibers,
    tubularity,
)
from xctlab.extraction.phantom import segment_segment_distance
from xctlab.errors import DegenerateTraceError
from xctlab.volume import from_array


class TestTubularity:
    def test_ideal_bright_tube(self):
        lams = (0.0, -10.0, -10.0)
        s = math.sqrt(sum(l * l for l in lams))
        gamma = s / 2.0
        got = tubularity(lams, gamma)
        # Documented closed form: Ra=1, Rb=0, S-term with gamma = S/2.
        ideal = (1.0 - math.exp(-2.0)) * 1.0 * (1.0 - math.exp(-2.0))
        assert got == pytest.approx(ideal, rel=1e-12)
        assert got > 0.9 * ideal
        assert 0.0 <= got < 1.0

    def test_dark_structure_rejected(self):
        assert tubularity((0.0, 10.0, 10.0), gamma=5.0) == 0.0

    def test_flat_background(self):
        assert tubularity((0.0, 0.0, 0.0), gamma=5.0) == 0.0

    def test_plate_scores_below_tube(self):
        s = math.sqrt(200.0)
        tube = tubularity((0.0, -10.0, -10.0), gamma=s / 2)
        plate = tubularity((0.0, -1.0, -10.0), gamma=s / 2)
        assert plate < tube

    def test_monotone_in_contrast(self):
        gamma = 10.0
        weak = tubularity((0.0, -2.0, -2.0), gamma)
        strong = tubularity((0.0, -8.0, -8.0), gamma)
        assert strong > weak > 0.0

    def test_invalid_gamma(self):
        with pytest.raises(ValueError):
            tubularity((0.0, -1.0, -1.0), gamma=0.0)


def single_cylinder_volume(dims=64, radius=3.0, length=50.0, axis="z"):
    c = dims / 2.0 - 0.5
    half = length / 2.0
    if axis == "z":
        p0, p1 = (c, c, c - half), (c, c, c + half)
    elif axis == "y":
        p0, p1 = (c, c - half, c), (c, c + half, c)
    else:
        p0, p1 = (c - half, c, c), (c + half, c, c)
    spec = CylinderSpec(p0=p0, p1=p1, radius=radius)
    return rasterize_cylinders((dims, dims, dims), [spec]), spec


class TestTraceFibers:
    def test_single_cylinder(self):
        vol, spec = single_cylinder_volume()
        traces = trace_fibers(vol, ExtractionConfig(sigma=2.0))
        assert len(traces) == 1
        arc = traces[0].arc_length
        assert abs(arc - 50.0) <= 2.0

    def test_two_parallel_cylinders_not_merged(self):
        dims = 64
        c = dims / 2.0 - 0.5
        specs = [
            CylinderSpec(p0=(c - 5, c, 7), p1=(c - 5, c, 57), radius=3.0),
            CylinderSpec(p0=(c + 5, c, 7), p1=(c + 5, c, 57), radius=3.0),
        ]
        vol = rasterize_cylinders((dims, dims, dims), specs)
        traces = trace_fibers(vol, ExtractionConfig(sigma=2.0))
        assert len(traces) == 2
        for t in traces:
            xs = t.points[:, 0]
            assert xs.std() < 1.0  # neither trace wanders to the other fiber

    def test_all_background_volume(self):
        vol = from_array(np.full((32, 32, 32), 20, dtype=np.uint8))
        assert trace_fibers(vol, ExtractionConfig()) == []

    def test_rotation_consistency(self):
        vol_x, _ = single_cylinder_volume(axis="x")
        vol_y, _ = single_cylinder_volume(axis="y")
        cfg = ExtractionConfig(sigma=2.0)
        tx = trace_fibers(vol_x, cfg)
        ty = trace_fibers(vol_y, cfg)
        assert len(tx) == len(ty) == 1
        assert abs(tx[0].arc_length - ty[0].arc_length) / tx[0].arc_length < 0.02

    def test_threshold_monotonicity(self):
        dims = 64
        c = dims / 2.0 - 0.5
        specs = [
            CylinderSpec(p0=(c - 10, c, 7), p1=(c - 10, c, 57), radius=3.0),
            CylinderSpec(p0=(c + 10, c - 8, 10), p1=(c + 10, c + 8, 50), radius=2.5),
        ]
        vol = rasterize_cylinders((dims, dims, dims), specs)
        counts = []
        for thr in (0.2, 0.1, 0.05, 0.02):
            counts.append(len(trace_fibers(vol, ExtractionConfig(ridge_threshold=thr))))
        assert all(b >= a for a, b in zip(counts, counts[1:]))  # lowering never loses

    def test_radius_estimates_close_to_truth(self):
        vol, spec = single_cylinder_volume(radius=3.0)
        traces = trace_fibers(vol, ExtractionConfig(sigma=2.0))
        mean_radius = float(np.mean(traces[0].radius_estimates))
        assert abs(mean_radius - 3.0) / 3.0 < 0.2

    def test_deterministic(self):
        vol, _ = single_cylinder_volume()
        cfg = ExtractionConfig()
        t1 = trace_fibers(vol, cfg)
        t2 = trace_fibers(vol, cfg)
        assert len(t1) == len(t2)
        np.testing.assert_array_equal(t1[0].points, t2[0].points)
        np.testing.assert_array_equal(t1[0].radius_estimates, t2[0].radius_estimates)


class TestCharacterize:
    def _trace(self, points, radius=0.5):
        pts = np.asarray(points, dtype=float)
        n = len(pts)
        return FiberTrace(points=pts, radius_estimates=np.full(n, radius),
                          responses=np.full(n, 0.5))

    def test_straight_cylinder_closed_form(self):
        rec = characterize(self._trace([(0, 0, 0), (0, 0, 5), (0, 0, 10)]), fiber_id=1)
        assert rec.straight_length == pytest.approx(10.0)
        assert rec.curved_length == pytest.approx(10.0)
        assert rec.curvature_ratio == pytest.approx(1.0)
        assert rec.diameter == pytest.approx(1.0)
        assert rec.volume == pytest.approx(math.pi * 0.25 * 10.0)
        assert rec.surface_area == pytest.approx(math.pi * 1.0 * 10.0)
        assert rec.theta == pytest.approx(0.0)
        np.testing.assert_allclose((rec.cog_x, rec.cog_y, rec.cog_z), (0, 0, 5))

    def test_right_angle_polyline(self):
        rec = characterize(self._trace([(0, 0, 0), (3, 0, 0), (3, 4, 0)]), fiber_id=2)
        assert rec.straight_length == pytest.approx(5.0)
        assert rec.curved_length == pytest.approx(7.0)
        assert rec.curvature_ratio == pytest.approx(1.4)

    def test_degenerate_trace(self):
        with pytest.raises(DegenerateTraceError):
            characterize(self._trace([(0, 0, 0), (1, 0, 0), (0, 0, 0)]), fiber_id=3)

    def test_orientation_angles(self):
        rec = characterize(self._trace([(0, 0, 0), (1, 1, math.sqrt(2))]), fiber_id=4)
        assert rec.theta == pytest.approx(45.0, abs=1e-6)
        assert rec.phi == pytest.approx(45.0, abs=1e-6)
        flipped = characterize(self._trace([(1, 1, math.sqrt(2)), (0, 0, 0)]), fiber_id=5)
        assert flipped.theta == pytest.approx(45.0, abs=1e-6)
        assert flipped.phi == pytest.approx(45.0, abs=1e-6)

    def test_phantom_cylinder_diameter(self):
        vol, spec = single_cylinder_volume(radius=3.0)
        table = extract_fibers(vol, ExtractionConfig(sigma=2.0))
        assert len(table) == 1
        rec = table.records[0]
        assert abs(rec.diameter - 6.0) / 6.0 <= 0.2
        assert rec.curvature_ratio >= 1.0

    def test_curved_at_least_straight_property(self):
        rng = np.random.default_rng(40)
        for _ in range(50):
            n = rng.integers(2, 12)
            pts = np.cumsum(rng.uniform(-1, 1, (n, 3)), axis=0)
            if np.linalg.norm(pts[-1] - pts[0]) < 1e-6:
                continue
            rec = characterize(self._trace(pts), fiber_id=1)
            assert rec.curved_length >= rec.straight_length - 1e-9


def test_segment_distance_helper():
    assert segment_segment_distance((0, 0, 0), (10, 0, 0), (0, 5, 0), (10, 5, 0)) == pytest.approx(5.0)
    assert segment_segment_distance((0, 0, 0), (10, 0, 0), (5, -1, 3), (5, 1, 3)) == pytest.approx(3.0)
    assert segment_segment_distance((0, 0, 0), (1, 0, 0), (3, 0, 0), (4, 0, 0)) == pytest.approx(2.0)
