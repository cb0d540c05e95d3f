"""Square binary fiducial markers: bit layout and dictionary construction.

A marker is a 6x6 cell grid: the outer ring is always black, the 4x4
interior encodes the id.  Cell k of the interior (row-major, k = 0..15)
holds, for k < 14, bit ``(id >> (13 - k)) & 1`` of the 14-bit id; cell 14
is the XOR of the even id bits and cell 15 the XOR of the odd id bits.
White = 1, black = 0.

Dictionaries only admit ids whose patterns keep a Hamming distance of at
least 4 to every rotation of every other member *and* to their own
nontrivial rotations, so a decoder can correct one bit error and still
recover the orientation unambiguously.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DictionaryError

GRID = 6
INTERIOR = 4
ID_BITS = 14
MAX_ID = (1 << ID_BITS) - 1


def encode_interior(marker_id: int) -> np.ndarray:
    """4x4 boolean interior for an id (see module docstring for the code)."""
    if not 0 <= marker_id <= MAX_ID:
        raise DictionaryError(f"marker id must lie in [0, {MAX_ID}], got {marker_id}")
    bits = [(marker_id >> (ID_BITS - 1 - k)) & 1 for k in range(ID_BITS)]
    p_even = 0
    p_odd = 0
    for i, b in enumerate(bits):
        if i % 2 == 0:
            p_even ^= b
        else:
            p_odd ^= b
    cells = bits + [p_even, p_odd]
    return np.array(cells, dtype=bool).reshape(INTERIOR, INTERIOR)


def full_grid(marker_id: int) -> np.ndarray:
    """6x6 boolean grid including the black border (False = black)."""
    grid = np.zeros((GRID, GRID), dtype=bool)
    grid[1:-1, 1:-1] = encode_interior(marker_id)
    return grid


@dataclass(frozen=True)
class MarkerDescriptor:
    id: int
    bits: np.ndarray = field(repr=False)  # (6, 6) bool, border all False
    side_mm: float = 50.0

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.shape != (GRID, GRID):
            raise DictionaryError(f"marker grid must be {GRID}x{GRID}")
        border = np.concatenate([bits[0], bits[-1], bits[:, 0], bits[:, -1]])
        if border.any():
            raise DictionaryError("marker border cells must all be black")
        if not self.side_mm > 0:
            raise DictionaryError("side_mm must be positive")
        object.__setattr__(self, "bits", bits)

    @property
    def interior(self) -> np.ndarray:
        return self.bits[1:-1, 1:-1]


class MarkerDictionary:
    """Set of markers decodable with single-bit error correction."""

    MIN_DISTANCE = 4

    def __init__(self, markers: list[MarkerDescriptor]):
        self._markers: dict[int, MarkerDescriptor] = {}
        self._patterns: list[tuple[int, np.ndarray]] = []  # (id, interior@rot)
        for m in markers:
            self.add(m)

    def __len__(self) -> int:
        return len(self._markers)

    def __iter__(self):
        return iter(self._markers.values())

    def get(self, marker_id: int) -> MarkerDescriptor:
        if marker_id not in self._markers:
            raise DictionaryError(f"marker id {marker_id} not in dictionary")
        return self._markers[marker_id]

    def add(self, marker: MarkerDescriptor) -> None:
        if marker.id in self._markers:
            raise DictionaryError(f"duplicate marker id {marker.id}")
        interior = marker.interior
        rotations = [np.rot90(interior, k) for k in range(4)]
        # Orientation ambiguity: the pattern must differ from its own rotations.
        for rot in rotations[1:]:
            if int(np.count_nonzero(rot != interior)) < self.MIN_DISTANCE:
                raise DictionaryError(
                    f"marker id {marker.id} is too rotation-symmetric for the dictionary")
        for other_id, pat in self._patterns:
            for rot in rotations:
                if int(np.count_nonzero(rot != pat)) < self.MIN_DISTANCE:
                    raise DictionaryError(
                        f"marker id {marker.id} collides with id {other_id} "
                        f"within the correction distance")
        self._markers[marker.id] = marker
        for k in range(4):
            self._patterns.append((marker.id, np.rot90(interior, k)))

    def decode(self, interior: np.ndarray) -> tuple[int, int, int] | None:
        """Match an observed 4x4 grid; returns (id, rotation, bit_errors).

        ``rotation`` is the number of 90-degree CCW grid rotations that maps
        the observation onto the stored pattern.  ``None`` when no stored
        pattern lies within 1 bit under any rotation.
        """
        obs = np.asarray(interior, dtype=bool)
        best: tuple[int, int, int] | None = None
        for marker_id, marker in self._markers.items():
            for k in range(4):
                dist = int(np.count_nonzero(np.rot90(obs, k) != marker.interior))
                if dist <= 1 and (best is None or dist < best[2]):
                    best = (marker_id, k, dist)
        return best

    def to_json(self) -> str:
        payload = {
            "grid": GRID,
            "markers": [
                {"id": m.id, "side_mm": m.side_mm,
                 "bits": m.bits.astype(int).reshape(-1).tolist()}
                for m in self._markers.values()
            ],
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MarkerDictionary":
        payload = json.loads(text)
        markers = []
        for entry in payload["markers"]:
            bits = np.asarray(entry["bits"], dtype=bool).reshape(GRID, GRID)
            markers.append(MarkerDescriptor(id=int(entry["id"]), bits=bits,
                                            side_mm=float(entry["side_mm"])))
        return cls(markers)

    @classmethod
    def load(cls, path) -> "MarkerDictionary":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


def build_dictionary(count: int, side_mm: float = 50.0,
                     start_id: int = 1) -> MarkerDictionary:
    """First ``count`` ids (from ``start_id``) that survive the distance
    filter; degenerate near-solid patterns are skipped for contrast."""
    dictionary = MarkerDictionary([])
    marker_id = start_id
    while len(dictionary) < count:
        if marker_id > MAX_ID:
            raise DictionaryError(f"exhausted id space after {len(dictionary)} markers")
        interior = encode_interior(marker_id)
        whites = int(np.count_nonzero(interior))
        if 3 <= whites <= 13:
            try:
                dictionary.add(MarkerDescriptor(id=marker_id, bits=full_grid(marker_id),
                                                side_mm=side_mm))
            except DictionaryError:
                pass
        marker_id += 1
    return dictionary
