"""Dataset registry: links marker ids to datasets and their files.

Registry file (JSON)::

    {
      "intrinsics": {"fx": 1600, "fy": 1600, "cx": 640, "cy": 480},
      "marker_dictionary": "markers.json",
      "datasets": [
        {
          "id": "fiber_sample_A",
          "display_name": "Fiber sample A",
          "volume": "a.raw",
          "meta": "a.meta",
          "csv": "a.csv",
          "markers": [3, 12],
          "default_views": [
            {"kind": "histogram", "params": {"column": "straight_length", "bins": 16}},
            {"kind": "histogram", "params": {"column": "curved_length", "bins": 16}},
            {"kind": "scatter3",
             "params": {"x": "diameter", "y": "surface_area", "z": "curved_length"}}
          ]
        }
      ]
    }

Relative paths resolve against the registry file's directory.  Dataset ids
must be unique, marker ids unique across datasets, and every referenced
file must exist at load time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ServiceError, UnknownDatasetError, UnknownMarkerError
from ..tracking import CameraIntrinsics, MarkerDictionary, build_dictionary

DEFAULT_INTRINSICS = CameraIntrinsics(fx=1600.0, fy=1600.0, cx=640.0, cy=480.0)


@dataclass(frozen=True)
class DatasetEntry:
    dataset_id: str
    volume_path: Path
    meta_path: Path
    csv_path: Path | None
    marker_ids: tuple[int, ...]
    display_name: str
    default_views: tuple[dict, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "id": self.dataset_id,
            "display_name": self.display_name,
            "markers": list(self.marker_ids),
            "has_table": self.csv_path is not None,
        }


class ServiceRegistry:
    def __init__(self, datasets: list[DatasetEntry],
                 intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS,
                 dictionary: MarkerDictionary | None = None):
        self.intrinsics = intrinsics
        self.dictionary = dictionary if dictionary is not None else build_dictionary(8)
        self._datasets: dict[str, DatasetEntry] = {}
        self._marker_links: dict[int, str] = {}
        for entry in datasets:
            if entry.dataset_id in self._datasets:
                raise ServiceError(f"duplicate dataset id {entry.dataset_id!r}")
            for path in (entry.volume_path, entry.meta_path, entry.csv_path):
                if path is not None and not Path(path).exists():
                    raise ServiceError(
                        f"dataset {entry.dataset_id!r}: missing file {path}")
            for marker_id in entry.marker_ids:
                if marker_id in self._marker_links:
                    raise ServiceError(
                        f"marker {marker_id} already linked to "
                        f"{self._marker_links[marker_id]!r}")
                self._marker_links[marker_id] = entry.dataset_id
            self._datasets[entry.dataset_id] = entry

    @property
    def datasets(self) -> list[DatasetEntry]:
        return list(self._datasets.values())

    @property
    def marker_links(self) -> dict[int, str]:
        return dict(self._marker_links)

    def get(self, dataset_id: str) -> DatasetEntry:
        if dataset_id not in self._datasets:
            raise UnknownDatasetError(dataset_id)
        return self._datasets[dataset_id]

    def resolve_marker(self, marker_id: int) -> str:
        if marker_id not in self._marker_links:
            raise UnknownMarkerError(marker_id)
        return self._marker_links[marker_id]

    @classmethod
    def load(cls, path) -> "ServiceRegistry":
        path = Path(path)
        payload = json.loads(path.read_text(encoding="utf-8"))
        root = path.parent

        def resolve(p):
            p = Path(p)
            return p if p.is_absolute() else root / p

        intr = (CameraIntrinsics.from_dict(payload["intrinsics"])
                if "intrinsics" in payload else DEFAULT_INTRINSICS)
        dictionary = None
        if "marker_dictionary" in payload:
            dictionary = MarkerDictionary.load(resolve(payload["marker_dictionary"]))
        entries = []
        for d in payload.get("datasets", []):
            entries.append(DatasetEntry(
                dataset_id=str(d["id"]),
                volume_path=resolve(d["volume"]),
                meta_path=resolve(d.get("meta", str(Path(d["volume"]).with_suffix(".meta")))),
                csv_path=resolve(d["csv"]) if d.get("csv") else None,
                marker_ids=tuple(int(m) for m in d.get("markers", [])),
                display_name=str(d.get("display_name", d["id"])),
                default_views=tuple(d.get("default_views", [])),
            ))
        return cls(entries, intrinsics=intr, dictionary=dictionary)
