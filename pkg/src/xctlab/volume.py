"""RAW volume loading with a key=value metadata sidecar.

On-disk contract
----------------
A volume is a pair of files: a headerless binary payload (``.raw``) and a
UTF-8 text sidecar (``.meta``) with one ``key=value`` pair per line.  The
payload is x-fastest: the scalar for voxel ``(x, y, z)`` sits at flat index
``x + nx * (y + ny * z)``.  No padding, byte order per the ``ByteOrder`` key.

Sidecar keys::

    DimSize        = nx ny nz          (required, positive integers)
    ElementType    = uint8|uint16|float32   (required)
    ElementSpacing = sx sy sz          (mm per voxel, default 1 1 1)
    ByteOrder      = little|big        (default little)
    Origin         = ox oy oz          (mm, default 0 0 0)

Lines starting with ``#`` and blank lines are ignored.  The key subset is
deliberately compatible with common medical-imaging header conventions so
existing tooling can emit it.

Intensities are exposed two ways: ``Volume.data`` keeps the raw scalars for
histograms, ``Volume.normalized`` maps onto [0, 1] for rendering (integer
types divide by their type maximum; float32 passes through unchanged and is
assumed to already live in [0, 1]).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadValueError,
    IndexOutOfRangeError,
    LengthMismatchError,
    MissingKeyError,
    UnknownDtypeError,
)

DTYPES = {
    "uint8": np.uint8,
    "uint16": np.uint16,
    "float32": np.float32,
}

_AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class VolumeMeta:
    """Geometry and scalar-type metadata for one RAW volume."""

    dims: tuple[int, int, int]
    dtype: str
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    endianness: str = "little"
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.dtype not in DTYPES:
            raise UnknownDtypeError(self.dtype)
        if len(self.dims) != 3 or any(int(d) < 1 for d in self.dims):
            raise BadValueError("DimSize", " ".join(map(str, self.dims)), "dims must be >= 1")
        if len(self.spacing) != 3 or any(not (s > 0) for s in self.spacing):
            raise BadValueError(
                "ElementSpacing", " ".join(map(str, self.spacing)), "spacing must be > 0"
            )
        if self.endianness not in ("little", "big"):
            raise BadValueError("ByteOrder", self.endianness, "must be little or big")

    @property
    def voxel_count(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def byte_count(self) -> int:
        return self.voxel_count * np.dtype(DTYPES[self.dtype]).itemsize

    def numpy_dtype(self) -> np.dtype:
        base = np.dtype(DTYPES[self.dtype])
        return base.newbyteorder("<" if self.endianness == "little" else ">")


@dataclass(frozen=True)
class Image2D:
    """A single-channel 2D image, pixels x-fastest like the volume layout."""

    width: int
    height: int
    pixels: np.ndarray  # flat, length width*height

    def __post_init__(self):
        if self.pixels.size != self.width * self.height:
            raise ValueError("pixel buffer does not match width*height")

    def pixel(self, i: int, j: int):
        return self.pixels[i + self.width * j]

    def as_array(self) -> np.ndarray:
        """Rows-by-columns view, ``arr[j, i]`` = pixel(i, j)."""
        return self.pixels.reshape(self.height, self.width)


@dataclass(frozen=True)
class Volume:
    """An immutable 3D scalar grid plus its metadata.

    ``data`` is stored as a C-ordered ``(nz, ny, nx)`` array so the memory
    layout equals the on-disk x-fastest flat order.
    """

    meta: VolumeMeta
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        nx, ny, nz = self.meta.dims
        if self.data.shape != (nz, ny, nx):
            raise ValueError(f"data shape {self.data.shape} does not match dims {self.meta.dims}")
        self.data.setflags(write=False)

    def voxel(self, x: int, y: int, z: int):
        return self.data[z, y, x]

    @property
    def normalized(self) -> np.ndarray:
        """Float32 intensities in [0, 1]; cached on first access."""
        cached = getattr(self, "_normalized", None)
        if cached is None:
            cached = normalize_scalars(self.data, self.meta.dtype)
            cached.setflags(write=False)
            object.__setattr__(self, "_normalized", cached)
        return cached

    def raw_bytes(self) -> bytes:
        """Serialize back to the exact on-disk payload."""
        return self.data.astype(self.meta.numpy_dtype(), copy=False).tobytes()


def normalize_scalars(data: np.ndarray, dtype: str) -> np.ndarray:
    if dtype == "uint8":
        return (data.astype(np.float32) / 255.0)
    if dtype == "uint16":
        return (data.astype(np.float32) / 65535.0)
    return data.astype(np.float32)


def _parse_triple(key: str, token: str, kind, positive: bool):
    parts = token.split()
    if len(parts) != 3:
        raise BadValueError(key, token, "expected 3 whitespace-separated values")
    try:
        values = tuple(kind(p) for p in parts)
    except ValueError:
        raise BadValueError(key, token, f"expected {kind.__name__} values") from None
    if positive and any(v <= 0 for v in values):
        raise BadValueError(key, token, "values must be positive")
    return values


def parse_meta(text: str) -> VolumeMeta:
    """Parse a sidecar document into :class:`VolumeMeta`.

    Raises :class:`MissingKeyError`, :class:`BadValueError` or
    :class:`UnknownDtypeError` with the offending key/token.
    """
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise BadValueError(f"line {lineno}", stripped, "expected key=value")
        key, _, value = stripped.partition("=")
        pairs[key.strip()] = value.strip()

    for required in ("DimSize", "ElementType"):
        if required not in pairs:
            raise MissingKeyError(required)

    dims = _parse_triple("DimSize", pairs["DimSize"], int, positive=True)
    dtype = pairs["ElementType"]
    if dtype not in DTYPES:
        raise UnknownDtypeError(dtype)

    spacing = (1.0, 1.0, 1.0)
    if "ElementSpacing" in pairs:
        spacing = _parse_triple("ElementSpacing", pairs["ElementSpacing"], float, positive=True)

    endianness = pairs.get("ByteOrder", "little")
    if endianness not in ("little", "big"):
        raise BadValueError("ByteOrder", endianness, "must be little or big")

    origin = (0.0, 0.0, 0.0)
    if "Origin" in pairs:
        parts = pairs["Origin"].split()
        if len(parts) != 3:
            raise BadValueError("Origin", pairs["Origin"], "expected 3 values")
        try:
            origin = tuple(float(p) for p in parts)
        except ValueError:
            raise BadValueError("Origin", pairs["Origin"], "expected float values") from None

    return VolumeMeta(dims=dims, dtype=dtype, spacing=spacing, endianness=endianness, origin=origin)


def write_meta(meta: VolumeMeta) -> str:
    """Serialize metadata to the sidecar format (inverse of :func:`parse_meta`)."""
    lines = [
        "DimSize=" + " ".join(str(d) for d in meta.dims),
        "ElementType=" + meta.dtype,
        "ElementSpacing=" + " ".join(repr(float(s)) for s in meta.spacing),
        "ByteOrder=" + meta.endianness,
        "Origin=" + " ".join(repr(float(o)) for o in meta.origin),
    ]
    return "\n".join(lines) + "\n"


def load_raw(payload: bytes, meta: VolumeMeta) -> Volume:
    """Decode an x-fastest RAW payload into a :class:`Volume`.

    Raises :class:`LengthMismatchError` when the byte count disagrees with
    ``dims`` and ``dtype``.
    """
    if len(payload) != meta.byte_count:
        raise LengthMismatchError(meta.byte_count, len(payload))
    nx, ny, nz = meta.dims
    flat = np.frombuffer(payload, dtype=meta.numpy_dtype())
    data = flat.reshape(nz, ny, nx).copy()
    return Volume(meta=meta, data=data)


def load_volume(raw_path: str | Path, meta_path: str | Path | None = None) -> Volume:
    """Load a volume from ``path.raw`` plus its sidecar.

    When ``meta_path`` is omitted, ``<raw_path stem>.meta`` next to the raw
    file is used.
    """
    raw_path = Path(raw_path)
    if meta_path is None:
        meta_path = raw_path.with_suffix(".meta")
    meta = parse_meta(Path(meta_path).read_text(encoding="utf-8"))
    return load_raw(raw_path.read_bytes(), meta)


def save_volume(volume: Volume, raw_path: str | Path, meta_path: str | Path | None = None) -> None:
    raw_path = Path(raw_path)
    if meta_path is None:
        meta_path = raw_path.with_suffix(".meta")
    raw_path.write_bytes(volume.raw_bytes())
    Path(meta_path).write_text(write_meta(volume.meta), encoding="utf-8")


def extract_slice(volume: Volume, axis: str, index: int) -> Image2D:
    """Axis-aligned slice with the remaining axes kept in ascending axis order.

    For ``axis="z"`` the image is (x, y); for ``"y"`` it is (x, z); for
    ``"x"`` it is (y, z).  Pixel (i, j) maps to the voxel whose sliced-axis
    coordinate is ``index`` and whose remaining coordinates are (i, j) in
    that order.
    """
    if axis not in _AXES:
        raise ValueError(f"axis must be one of x, y, z; got {axis!r}")
    nx, ny, nz = volume.meta.dims
    sizes = {"x": nx, "y": ny, "z": nz}
    if not 0 <= index < sizes[axis]:
        raise IndexOutOfRangeError(axis, index, sizes[axis])

    if axis == "z":
        plane = volume.data[index, :, :]  # (ny, nx) -> rows j=y, cols i=x
        width, height = nx, ny
    elif axis == "y":
        plane = volume.data[:, index, :]  # (nz, nx) -> rows j=z, cols i=x
        width, height = nx, nz
    else:
        plane = volume.data[:, :, index]  # (nz, ny) -> rows j=z, cols i=y
        width, height = ny, nz
    return Image2D(width=width, height=height, pixels=plane.reshape(-1).copy())


def from_array(data: np.ndarray, dtype: str = "uint8", spacing=(1.0, 1.0, 1.0),
               origin=(0.0, 0.0, 0.0), endianness: str = "little") -> Volume:
    """Build a Volume from a ``(nz, ny, nx)`` array (helper for tests/phantoms)."""
    nz, ny, nx = data.shape
    meta = VolumeMeta(dims=(nx, ny, nz), dtype=dtype, spacing=tuple(spacing),
                      origin=tuple(origin), endianness=endianness)
    return Volume(meta=meta, data=np.ascontiguousarray(data, dtype=DTYPES[dtype]))
