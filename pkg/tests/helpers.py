"""Shared test fixtures: consistent fiber records and synthetic tables."""

import math

import numpy as np

from xctlab.fibertable import FiberRecord, FiberTable


def make_record(fiber_id, start, end, diameter, curvature_ratio=1.0,
                point_count=10, mean_tubularity=0.5):
    """Build a record whose derived columns satisfy every schema invariant."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    direction = end - start
    straight = float(np.linalg.norm(direction))
    if straight == 0:
        raise ValueError("degenerate fiber in test helper")
    curved = straight * curvature_ratio
    d = direction if direction[2] >= 0 else -direction
    theta = math.degrees(math.acos(min(1.0, abs(d[2]) / straight)))
    phi = math.degrees(math.atan2(d[1], d[0])) % 360.0
    cog = (start + end) / 2.0
    return FiberRecord(
        id=int(fiber_id),
        start_x=start[0], start_y=start[1], start_z=start[2],
        end_x=end[0], end_y=end[1], end_z=end[2],
        straight_length=straight,
        curved_length=curved,
        curvature_ratio=curvature_ratio,
        diameter=float(diameter),
        surface_area=math.pi * diameter * curved,
        volume=math.pi * (diameter / 2.0) ** 2 * curved,
        theta=theta,
        phi=phi,
        cog_x=cog[0], cog_y=cog[1], cog_z=cog[2],
        point_count=int(point_count),
        mean_tubularity=float(mean_tubularity),
    )


def random_table(n, seed=0) -> FiberTable:
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        start = rng.uniform(-10, 10, 3)
        end = start + rng.uniform(0.5, 8.0) * _unit(rng)
        records.append(make_record(
            i + 1, start, end,
            diameter=float(rng.uniform(0.05, 0.5)),
            curvature_ratio=float(1.0 + rng.uniform(0, 0.5)),
            point_count=int(rng.integers(2, 200)),
            mean_tubularity=float(rng.uniform(0.01, 0.99)),
        ))
    return FiberTable(records)


def _unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)
