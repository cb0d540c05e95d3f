"""Reduce a traced medial axis to the 20-column fiber record."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DegenerateTraceError
from ..fibertable import FiberRecord, FiberTable
from ..volume import Volume
from .tracing import ExtractionConfig, FiberTrace, trace_fibers


def characterize(trace: FiberTrace, fiber_id: int = 1) -> FiberRecord:
    """Closed-form characteristics of one trace (all inputs already in mm)."""
    points = np.asarray(trace.points, dtype=float)
    start, end = points[0], points[-1]
    chord = end - start
    straight = float(np.linalg.norm(chord))
    if straight == 0.0:
        raise DegenerateTraceError(f"trace {fiber_id}: start equals end")

    seg_vecs = np.diff(points, axis=0)
    seg_lens = np.linalg.norm(seg_vecs, axis=1)
    curved = float(seg_lens.sum())
    ratio = curved / straight

    diameter = 2.0 * float(np.mean(trace.radius_estimates))
    surface_area = math.pi * diameter * curved
    volume = math.pi * (diameter / 2.0) ** 2 * curved

    # Orientation from the chord, normalized to the upper hemisphere so
    # (theta, phi) is independent of traversal direction.
    d = chord if chord[2] >= 0 else -chord
    theta = math.degrees(math.acos(min(1.0, abs(d[2]) / straight)))
    phi = math.degrees(math.atan2(d[1], d[0])) % 360.0

    midpoints = (points[:-1] + points[1:]) / 2.0
    cog = (midpoints * seg_lens[:, None]).sum(axis=0) / curved

    mean_tub = float(np.mean(trace.responses))
    mean_tub = min(max(mean_tub, 0.0), math.nextafter(1.0, 0.0))

    return FiberRecord(
        id=int(fiber_id),
        start_x=float(start[0]), start_y=float(start[1]), start_z=float(start[2]),
        end_x=float(end[0]), end_y=float(end[1]), end_z=float(end[2]),
        straight_length=straight,
        curved_length=curved,
        curvature_ratio=ratio,
        diameter=diameter,
        surface_area=surface_area,
        volume=volume,
        theta=theta,
        phi=phi,
        cog_x=float(cog[0]), cog_y=float(cog[1]), cog_z=float(cog[2]),
        point_count=len(points),
        mean_tubularity=mean_tub,
    )


def extract_fibers(volume: Volume, cfg: ExtractionConfig | None = None) -> FiberTable:
    """Full pipeline: trace the volume and characterize every fiber."""
    traces = trace_fibers(volume, cfg)
    return FiberTable([characterize(t, i + 1) for i, t in enumerate(traces)])
