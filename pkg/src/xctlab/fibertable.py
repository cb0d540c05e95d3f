"""The per-fiber attribute table and its CSV interchange format.

Schema v1 (frozen; column order is the contract)::

    id              1-based fiber id                     [-]
    start_x/y/z     trace start point                    [mm]
    end_x/y/z       trace end point                      [mm]
    straight_length |end - start|                        [mm]
    curved_length   polyline arc length                  [mm]
    curvature_ratio curved / straight                    [-]
    diameter        2 * mean radius estimate             [mm]
    surface_area    pi * diameter * curved_length        [mm^2]
    volume          pi * (diameter/2)^2 * curved_length  [mm^3]
    theta           angle to the z axis, 0..90           [deg]
    phi             azimuth, 0..360                      [deg]
    cog_x/y/z       polyline centroid                    [mm]
    point_count     trace sample count                   [-]
    mean_tubularity mean ridge response along the trace  [-]

CSV details: comma-delimited, '.' decimal separator, no thousands
separators, floats serialized with shortest round-trip formatting (parse
after write is exact).  Lines starting with ``#`` are permitted anywhere
and ignored, so units may be documented inline as ``# unit: ...`` comments.
Foreign headers can be adapted by passing ``column_map`` (foreign name ->
schema v1 name) instead of editing files.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, fields as dataclass_fields

from .errors import (
    DuplicateIdError,
    HeaderMismatchError,
    NumericParseError,
    RecordInvariantError,
    RowArityError,
    UnknownColumnError,
)

SCHEMA_VERSION = 1

#: Canonical column order with units.
COLUMNS: tuple[tuple[str, str], ...] = (
    ("id", ""),
    ("start_x", "mm"),
    ("start_y", "mm"),
    ("start_z", "mm"),
    ("end_x", "mm"),
    ("end_y", "mm"),
    ("end_z", "mm"),
    ("straight_length", "mm"),
    ("curved_length", "mm"),
    ("curvature_ratio", ""),
    ("diameter", "mm"),
    ("surface_area", "mm^2"),
    ("volume", "mm^3"),
    ("theta", "deg"),
    ("phi", "deg"),
    ("cog_x", "mm"),
    ("cog_y", "mm"),
    ("cog_z", "mm"),
    ("point_count", ""),
    ("mean_tubularity", ""),
)

COLUMN_NAMES: tuple[str, ...] = tuple(name for name, _ in COLUMNS)
_INT_COLUMNS = {"id", "point_count"}

# Float noise allowance for derived-value invariants.
_EPS = 1e-9
_STRAIGHT_TOL = 1e-4


@dataclass(frozen=True)
class FiberRecord:
    id: int
    start_x: float
    start_y: float
    start_z: float
    end_x: float
    end_y: float
    end_z: float
    straight_length: float
    curved_length: float
    curvature_ratio: float
    diameter: float
    surface_area: float
    volume: float
    theta: float
    phi: float
    cog_x: float
    cog_y: float
    cog_z: float
    point_count: int
    mean_tubularity: float

    def validate(self) -> None:
        if self.id < 1:
            raise RecordInvariantError(f"fiber id must be >= 1, got {self.id}")
        d = math.dist((self.start_x, self.start_y, self.start_z),
                      (self.end_x, self.end_y, self.end_z))
        if abs(d - self.straight_length) > _STRAIGHT_TOL:
            raise RecordInvariantError(
                f"fiber {self.id}: straight_length {self.straight_length} "
                f"disagrees with endpoints (|end-start| = {d})")
        if self.curved_length < self.straight_length - _EPS:
            raise RecordInvariantError(
                f"fiber {self.id}: curved_length {self.curved_length} "
                f"< straight_length {self.straight_length}")
        if self.curvature_ratio < 1.0 - _EPS:
            raise RecordInvariantError(
                f"fiber {self.id}: curvature_ratio {self.curvature_ratio} < 1")
        if not self.diameter > 0:
            raise RecordInvariantError(f"fiber {self.id}: diameter must be > 0")
        if not self.volume > 0:
            raise RecordInvariantError(f"fiber {self.id}: volume must be > 0")
        if not 0.0 <= self.theta <= 90.0:
            raise RecordInvariantError(f"fiber {self.id}: theta {self.theta} outside [0, 90]")
        if not 0.0 <= self.phi < 360.0:
            raise RecordInvariantError(f"fiber {self.id}: phi {self.phi} outside [0, 360)")
        if self.point_count < 2:
            raise RecordInvariantError(f"fiber {self.id}: point_count must be >= 2")
        if not 0.0 <= self.mean_tubularity < 1.0:
            raise RecordInvariantError(
                f"fiber {self.id}: mean_tubularity {self.mean_tubularity} outside [0, 1)")

    def values(self) -> tuple:
        return tuple(getattr(self, name) for name in COLUMN_NAMES)


class FiberTable:
    """Ordered, validated collection of fiber records."""

    def __init__(self, records: list[FiberRecord]):
        seen = set()
        for rec in records:
            rec.validate()
            if rec.id in seen:
                raise DuplicateIdError(rec.id)
            seen.add(rec.id)
        self._records = list(records)

    @property
    def records(self) -> list[FiberRecord]:
        return list(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    def __eq__(self, other) -> bool:
        return isinstance(other, FiberTable) and self._records == other._records

    @property
    def column_names(self) -> tuple[str, ...]:
        return COLUMN_NAMES

    @property
    def column_units(self) -> dict[str, str]:
        return dict(COLUMNS)

    def column(self, name: str) -> list[float]:
        """Values of one column in row order."""
        if name not in COLUMN_NAMES:
            raise UnknownColumnError(name, COLUMN_NAMES)
        return [float(getattr(rec, name)) for rec in self._records]


def _format_value(name: str, value) -> str:
    if name in _INT_COLUMNS:
        return str(int(value))
    return repr(float(value))


def write_csv(table: FiberTable) -> str:
    """Serialize to schema v1 CSV; ``parse_csv`` restores it exactly."""
    out = io.StringIO()
    out.write(f"# fiber table schema v{SCHEMA_VERSION}\n")
    out.write("# unit: " + ",".join(unit or "-" for _, unit in COLUMNS) + "\n")
    out.write(",".join(COLUMN_NAMES) + "\n")
    for rec in table:
        out.write(",".join(_format_value(n, v) for n, v in zip(COLUMN_NAMES, rec.values())))
        out.write("\n")
    return out.getvalue()


def parse_csv(text: str, column_map: dict[str, str] | None = None) -> FiberTable:
    """Parse schema v1 CSV text.

    ``column_map`` optionally renames foreign header names onto schema v1
    (applied before header validation).  Raises :class:`HeaderMismatchError`,
    :class:`RowArityError`, :class:`NumericParseError` or
    :class:`DuplicateIdError`.
    """
    header: list[str] | None = None
    records: list[FiberRecord] = []
    expected = len(COLUMN_NAMES)

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        cells = [c.strip() for c in stripped.split(",")]
        if header is None:
            if column_map:
                cells = [column_map.get(c, c) for c in cells]
            missing = [c for c in COLUMN_NAMES if c not in cells]
            extra = [c for c in cells if c not in COLUMN_NAMES]
            if missing or extra or cells != list(COLUMN_NAMES):
                raise HeaderMismatchError(missing, extra)
            header = cells
            continue
        if len(cells) != expected:
            raise RowArityError(lineno, len(cells), expected)
        kwargs = {}
        for name, token in zip(COLUMN_NAMES, cells):
            try:
                value = float(token)
            except ValueError:
                raise NumericParseError(lineno, name, token) from None
            if name in _INT_COLUMNS:
                if not value.is_integer():
                    raise NumericParseError(lineno, name, token)
                value = int(value)
            kwargs[name] = value
        records.append(FiberRecord(**kwargs))

    if header is None:
        raise HeaderMismatchError(list(COLUMN_NAMES), [])
    return FiberTable(records)


def load_csv(path, column_map: dict[str, str] | None = None) -> FiberTable:
    from pathlib import Path

    return parse_csv(Path(path).read_text(encoding="utf-8"), column_map=column_map)


def save_csv(table: FiberTable, path) -> None:
    from pathlib import Path

    Path(path).write_text(write_csv(table), encoding="utf-8")


assert tuple(f.name for f in dataclass_fields(FiberRecord)) == COLUMN_NAMES
assert len(COLUMNS) == 20
