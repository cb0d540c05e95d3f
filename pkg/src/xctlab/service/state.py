"""Session and workspace state: placed views, poses, event log, persistence.

A workspace is the durable part of a session: the placed views (id, kind,
chart parameters, pose), the active dataset and the sample pose.  It
round-trips through a JSON document per workspace id so a UI reload (or a
new session opened on the same workspace id) restores the exact layout.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from ..charts import HistogramSpec
from ..errors import BadParamsError, NoActiveDatasetError
from ..fibertable import COLUMN_NAMES, FiberTable
from ..geometry import IDENTITY_POSE, Pose6DoF
from ..volume import Volume

VIEW_KINDS = ("volume", "slice", "histogram", "scatter3", "bar", "density")


@dataclass
class PlacedView:
    view_id: int
    kind: str
    params: dict
    pose: Pose6DoF

    def to_dict(self) -> dict:
        return {"view_id": self.view_id, "kind": self.kind,
                "params": self.params, "pose": self.pose.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "PlacedView":
        return cls(view_id=int(d["view_id"]), kind=str(d["kind"]),
                   params=dict(d.get("params", {})),
                   pose=Pose6DoF.from_dict(d.get("pose", {})))


def validate_view_params(kind: str, params: dict) -> None:
    """Reject malformed view parameters before they reach the workspace."""
    if kind not in VIEW_KINDS:
        raise BadParamsError(f"unknown view kind {kind!r}; valid: {', '.join(VIEW_KINDS)}")
    if kind == "histogram":
        column = params.get("column")
        if column not in COLUMN_NAMES:
            raise BadParamsError(f"histogram column {column!r} is not a table column")
        bins = params.get("bins", 16)
        if not isinstance(bins, int) or bins < 1:
            raise BadParamsError(f"histogram bins must be a positive integer, got {bins!r}")
        HistogramSpec(bin_count=bins)
    elif kind == "scatter3":
        for axis in ("x", "y", "z"):
            column = params.get(axis)
            if column not in COLUMN_NAMES:
                raise BadParamsError(f"scatter3 {axis} column {column!r} is not a table column")
    elif kind == "density":
        column = params.get("column")
        if column not in COLUMN_NAMES:
            raise BadParamsError(f"density column {column!r} is not a table column")
        bandwidth = params.get("bandwidth", "auto")
        if bandwidth != "auto" and (not isinstance(bandwidth, (int, float)) or bandwidth <= 0):
            raise BadParamsError(f"density bandwidth must be positive or 'auto', got {bandwidth!r}")
    elif kind == "bar":
        group = params.get("group")
        if group not in COLUMN_NAMES:
            raise BadParamsError(f"bar group column {group!r} is not a table column")
        agg = params.get("agg", "count")
        if agg not in ("count", "mean", "sum"):
            raise BadParamsError(f"bar agg must be count|mean|sum, got {agg!r}")
        if agg != "count" and params.get("value") not in COLUMN_NAMES:
            raise BadParamsError(f"bar value column {params.get('value')!r} is not a table column")
    elif kind == "slice":
        if params.get("axis", "z") not in ("x", "y", "z"):
            raise BadParamsError("slice axis must be x, y or z")


@dataclass
class Workspace:
    views: list[PlacedView] = field(default_factory=list)
    active_dataset: str | None = None
    sample_pose: Pose6DoF = IDENTITY_POSE
    next_view_id: int = 1

    def to_dict(self) -> dict:
        return {
            "views": [v.to_dict() for v in self.views],
            "active_dataset": self.active_dataset,
            "sample_pose": self.sample_pose.to_dict(),
            "next_view_id": self.next_view_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Workspace":
        return cls(
            views=[PlacedView.from_dict(v) for v in d.get("views", [])],
            active_dataset=d.get("active_dataset"),
            sample_pose=Pose6DoF.from_dict(d.get("sample_pose", {})),
            next_view_id=int(d.get("next_view_id", 1)),
        )

    def view(self, view_id: int) -> PlacedView:
        for v in self.views:
            if v.view_id == view_id:
                return v
        raise BadParamsError(f"no view with id {view_id}")


class Session:
    def __init__(self, session_id: str, workspace_id: str, workspace: Workspace):
        self.session_id = session_id
        self.workspace_id = workspace_id
        self.workspace = workspace
        self.volume: Volume | None = None
        self.table: FiberTable | None = None
        self.events: list[dict] = []
        self.lock = threading.RLock()
        self._event_cond = threading.Condition(self.lock)

    def emit(self, event_type: str, data: dict) -> dict:
        """Append an event to the per-session ordered log."""
        with self._event_cond:
            event = {"seq": len(self.events) + 1, "event": event_type, "data": data}
            self.events.append(event)
            self._event_cond.notify_all()
            return event

    def events_after(self, seq: int) -> list[dict]:
        with self.lock:
            return [e for e in self.events if e["seq"] > seq]

    def require_volume(self) -> Volume:
        if self.volume is None:
            raise NoActiveDatasetError()
        return self.volume

    def require_table(self) -> FiberTable:
        if self.table is None:
            raise NoActiveDatasetError()
        return self.table


class WorkspaceStore:
    """One JSON file per workspace id, saved on every mutation."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, workspace_id: str) -> Path:
        safe = "".join(c if c.isalnum() or c in "-_" else "_" for c in workspace_id)
        return self.root / f"{safe}.json"

    def save(self, workspace_id: str, workspace: Workspace) -> None:
        self.path(workspace_id).write_text(
            json.dumps(workspace.to_dict(), indent=2), encoding="utf-8")

    def load(self, workspace_id: str) -> Workspace | None:
        path = self.path(workspace_id)
        if not path.exists():
            return None
        return Workspace.from_dict(json.loads(path.read_text(encoding="utf-8")))
