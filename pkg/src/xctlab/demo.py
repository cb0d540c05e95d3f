"""Self-contained demo workspace: phantom datasets, fiber tables, markers.

Builds everything the service needs on disk so `xctlab serve` (and the
browser workbench) run against reproducible synthetic data: two datasets,
the first carrying two image targets (thin homogeneous samples need a
second target), each with the pre-selected views of the inspection
workflow - two length histograms and a diameter/area/length scatterplot.
"""

from __future__ import annotations

import json
from pathlib import Path

from .extraction import ExtractionConfig, extract_fibers, random_phantom
from .fibertable import save_csv
from .service.registry import DEFAULT_INTRINSICS
from .tracking import CameraIntrinsics, build_dictionary
from .volume import save_volume

DEFAULT_VIEWS = (
    {"kind": "histogram", "params": {"column": "straight_length", "bins": 16},
     "pose": {"translation": [-220.0, 120.0, 0.0]}},
    {"kind": "histogram", "params": {"column": "curved_length", "bins": 16},
     "pose": {"translation": [220.0, 120.0, 0.0]}},
    {"kind": "scatter3",
     "params": {"x": "diameter", "y": "surface_area", "z": "curved_length"},
     "pose": {"translation": [0.0, -160.0, 0.0]}},
)


def build_demo_workspace(root, seed: int = 7, size: int = 96,
                         fiber_counts: tuple[int, int] = (12, 7),
                         intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS,
                         extraction: ExtractionConfig | None = None) -> Path:
    """Create volumes, tables, marker dictionary and registry under ``root``.

    Returns the registry path.  Deterministic for a fixed seed.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    dictionary = build_dictionary(4)
    ids = [m.id for m in dictionary]
    dictionary.save(root / "markers.json")

    datasets = []
    specs = [
        ("fiber_sample_A", "Fiber sample A", fiber_counts[0], seed, [ids[0], ids[1]]),
        ("fiber_sample_B", "Fiber sample B", fiber_counts[1], seed + 1, [ids[2]]),
    ]
    cfg = extraction or ExtractionConfig()
    for dataset_id, display, count, ds_seed, markers in specs:
        volume, _truth = random_phantom((size, size, size), count, seed=ds_seed)
        save_volume(volume, root / f"{dataset_id}.raw", root / f"{dataset_id}.meta")
        table = extract_fibers(volume, cfg)
        save_csv(table, root / f"{dataset_id}.csv")
        datasets.append({
            "id": dataset_id,
            "display_name": display,
            "volume": f"{dataset_id}.raw",
            "meta": f"{dataset_id}.meta",
            "csv": f"{dataset_id}.csv",
            "markers": markers,
            "default_views": list(DEFAULT_VIEWS),
        })

    registry_path = root / "registry.json"
    registry_path.write_text(json.dumps({
        "intrinsics": intrinsics.to_dict(),
        "marker_dictionary": "markers.json",
        "datasets": datasets,
    }, indent=2), encoding="utf-8")
    return registry_path
