"""Chart data behind the abstract-data views: histogram, 3D scatter, bar
aggregation and kernel density estimates.

These functions return plain data (counts, triples, sampled curves), never
pixels; every result serializes to a documented JSON shape via ``to_dict``
so the service and UI share one contract.

Binning convention: half-open bins ``[lo, hi)`` with ``bin = floor((v - lo)
/ width)``; ``v == hi`` is excluded.  Values below ``lo`` / at or above
``hi`` land in explicit ``below`` / ``above`` tallies so the counts always
add up to the input length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadRangeError,
    EmptyInputError,
    NonNumericError,
    TooFewValuesError,
    UnknownColumnError,
)
from .fibertable import COLUMN_NAMES, FiberTable
from .volume import Volume

DENSITY_SAMPLES = 256
DEFAULT_BAR_CLASSES = 5


@dataclass(frozen=True)
class HistogramSpec:
    bin_count: int
    range: tuple[float, float] | None = None  # None = auto (min..nextafter(max))

    def __post_init__(self):
        if self.bin_count < 1:
            raise BadRangeError(f"bin_count must be >= 1, got {self.bin_count}")
        if self.range is not None:
            lo, hi = self.range
            if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                raise BadRangeError(f"range must satisfy lo < hi, got {self.range}")


@dataclass(frozen=True)
class HistogramResult:
    counts: list[int]
    edges: list[float]
    below: int
    above: int

    @property
    def total(self) -> int:
        return sum(self.counts) + self.below + self.above

    def to_dict(self) -> dict:
        return {
            "kind": "histogram",
            "counts": self.counts,
            "edges": self.edges,
            "below": self.below,
            "above": self.above,
        }


@dataclass(frozen=True)
class Series3D:
    x: list[float]
    y: list[float]
    z: list[float]
    labels: tuple[str, str, str]
    units: tuple[str, str, str]
    dropped: int = 0

    def __len__(self) -> int:
        return len(self.x)

    def to_dict(self) -> dict:
        return {
            "kind": "scatter3",
            "x": self.x,
            "y": self.y,
            "z": self.z,
            "labels": list(self.labels),
            "units": list(self.units),
            "dropped": self.dropped,
        }


@dataclass(frozen=True)
class DensityResult:
    x: list[float]
    density: list[float]
    bandwidth: float

    def to_dict(self) -> dict:
        return {
            "kind": "density",
            "x": self.x,
            "density": self.density,
            "bandwidth": self.bandwidth,
        }


@dataclass(frozen=True)
class BarResult:
    labels: list[str]
    values: list[float | None]
    edges: list[float]
    agg: str

    def to_dict(self) -> dict:
        return {
            "kind": "bar",
            "labels": self.labels,
            "values": self.values,
            "edges": self.edges,
            "agg": self.agg,
        }


def _auto_range(values: np.ndarray) -> tuple[float, float]:
    lo = float(values.min())
    hi = float(values.max())
    # Degenerate spread: nextafter keeps the width positive and the max in-bin.
    return lo, math.nextafter(hi, math.inf)


def histogram(values, spec: HistogramSpec) -> HistogramResult:
    """Bin counts over half-open bins plus out-of-range tallies."""
    arr = np.asarray(values, dtype=float).ravel()
    if spec.range is None:
        if arr.size == 0:
            raise EmptyInputError("auto range needs at least one value")
        lo, hi = _auto_range(arr)
    else:
        lo, hi = spec.range
    width = (hi - lo) / spec.bin_count
    below = int(np.count_nonzero(arr < lo))
    above = int(np.count_nonzero(arr >= hi))
    in_range = arr[(arr >= lo) & (arr < hi)]
    idx = np.floor((in_range - lo) / width).astype(int)
    # Float roundoff can push a value exactly onto bin_count; clamp it back.
    idx = np.minimum(idx, spec.bin_count - 1)
    counts = np.bincount(idx, minlength=spec.bin_count)
    edges = [lo + k * width for k in range(spec.bin_count)] + [hi]
    return HistogramResult(counts=[int(c) for c in counts], edges=edges,
                           below=below, above=above)


def scatter3(table: FiberTable, ax: str, ay: str, az: str) -> Series3D:
    """One (x, y, z) triple per record; rows with non-finite values dropped."""
    cols = []
    for name in (ax, ay, az):
        if name not in COLUMN_NAMES:
            raise UnknownColumnError(name, COLUMN_NAMES)
        cols.append(np.asarray(table.column(name), dtype=float))
    x, y, z = cols
    finite = np.isfinite(x) & np.isfinite(y) & np.isfinite(z)
    dropped = int(np.count_nonzero(~finite))
    units = table.column_units
    return Series3D(
        x=x[finite].tolist(), y=y[finite].tolist(), z=z[finite].tolist(),
        labels=(ax, ay, az),
        units=(units[ax], units[ay], units[az]),
        dropped=dropped,
    )


def silverman_bandwidth(values: np.ndarray) -> float:
    """0.9 * min(std, IQR/1.34) * n^(-1/5) (documented auto rule)."""
    n = values.size
    std = float(np.std(values, ddof=1))
    q75, q25 = np.percentile(values, [75, 25])
    iqr = float(q75 - q25)
    candidates = [c for c in (std, iqr / 1.34) if c > 0]
    if not candidates:
        raise BadRangeError("auto bandwidth undefined for zero-spread data; pass one explicitly")
    return 0.9 * min(candidates) * n ** (-1.0 / 5.0)


def density(values, bandwidth="auto") -> DensityResult:
    """Gaussian KDE sampled at 256 points over [min - 3h, max + 3h]."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size < 2:
        raise TooFewValuesError("density needs at least 2 values")
    if bandwidth == "auto":
        h = silverman_bandwidth(arr)
    else:
        h = float(bandwidth)
        if not h > 0:
            raise BadRangeError(f"bandwidth must be positive, got {bandwidth}")
    xs = np.linspace(arr.min() - 3 * h, arr.max() + 3 * h, DENSITY_SAMPLES)
    diff = (xs[:, None] - arr[None, :]) / h
    dens = np.exp(-0.5 * diff * diff).sum(axis=1) / (arr.size * h * math.sqrt(2 * math.pi))
    return DensityResult(x=xs.tolist(), density=dens.tolist(), bandwidth=h)


def bar_aggregate(table: FiberTable, group_attr: str, value_attr: str | None,
                  agg: str = "count", classes: int = DEFAULT_BAR_CLASSES) -> BarResult:
    """Aggregate a value column over equal-width classes of ``group_attr``.

    ``value_attr`` is ignored for ``count``.  Empty classes report 0 for
    count/sum and ``None`` for mean.
    """
    if agg not in ("count", "mean", "sum"):
        raise BadRangeError(f"agg must be count, mean or sum, got {agg!r}")
    if classes < 1:
        raise BadRangeError("classes must be >= 1")
    if group_attr not in COLUMN_NAMES:
        raise UnknownColumnError(group_attr, COLUMN_NAMES)
    group = np.asarray(table.column(group_attr), dtype=float)
    if agg == "count":
        values = np.zeros_like(group)
    else:
        if value_attr is None:
            raise NonNumericError(f"{agg} aggregation needs a value column")
        if value_attr not in COLUMN_NAMES:
            raise UnknownColumnError(value_attr, COLUMN_NAMES)
        values = np.asarray(table.column(value_attr), dtype=float)
        if not np.all(np.isfinite(values)):
            raise NonNumericError(f"column {value_attr} contains non-finite values")

    if group.size == 0:
        edges = [0.0] * (classes + 1)
        empty = [0.0 if agg != "mean" else None] * classes
        return BarResult(labels=[""] * classes, values=empty, edges=edges, agg=agg)

    lo, hi = _auto_range(group)
    width = (hi - lo) / classes
    idx = np.minimum(np.floor((group - lo) / width).astype(int), classes - 1)
    edges = [lo + k * width for k in range(classes)] + [hi]
    labels = [f"[{edges[k]:.4g}, {edges[k + 1]:.4g})" for k in range(classes)]
    out: list[float | None] = []
    for k in range(classes):
        mask = idx == k
        n = int(np.count_nonzero(mask))
        if agg == "count":
            out.append(float(n))
        elif agg == "sum":
            out.append(float(values[mask].sum()) if n else 0.0)
        else:
            out.append(float(values[mask].mean()) if n else None)
    return BarResult(labels=labels, values=out, edges=edges, agg=agg)


def intensity_histogram(volume: Volume, bins: int,
                        value_range: tuple[float, float] | None = None) -> HistogramResult:
    """Histogram over raw voxel scalars (not normalized intensities)."""
    flat = volume.data.ravel().astype(float)
    return histogram(flat, HistogramSpec(bin_count=bins, range=value_range))
