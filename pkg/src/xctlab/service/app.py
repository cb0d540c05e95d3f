"""HTTP + server-sent-events API over the inspection engine.

Endpoints (JSON unless noted):

    GET    /datasets                      registry listing
    POST   /sessions                      {"workspace_id"?} -> session info
    GET    /sessions/{sid}                session state (views, poses)
    POST   /sessions/{sid}/frames         PNG body -> detection report
    GET    /sessions/{sid}/render         ?mode=mip|dvr&w&h&camera&tf -> PNG
    GET    /sessions/{sid}/slice          ?axis=z&index=0 -> PNG
    GET    /sessions/{sid}/volume/histogram  ?bins=64
    GET    /sessions/{sid}/charts/{vid}   chart data for a placed view
    POST   /sessions/{sid}/views          {"kind", "params", "pose"?} -> id
    PATCH  /sessions/{sid}/views/{vid}    {"pose": {...}}
    DELETE /sessions/{sid}/views/{vid}
    GET    /sessions/{sid}/meshes         ?segments=16&limit=500
    GET    /sessions/{sid}/events         SSE; ?after=seq&limit=n&timeout=s
    GET    /demo/frame                    ?dataset&index&blank -> synthetic PNG

Renders carry an ``ETag``/``X-Content-Hash`` (sha256 of the rgba buffer);
``If-None-Match`` is honored with 304.  Event payloads:
``dataset-changed`` {dataset, display_name}, ``pose`` {pose, marker_id},
``view-changed`` {view_id, action}.
"""

from __future__ import annotations

import asyncio
import json
import math
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .. import charts
from ..errors import (
    BadParamsError,
    BadTFError,
    NoActiveDatasetError,
    ServiceError,
    UnknownDatasetError,
    UnknownMarkerError,
    XctlabError,
)
from ..fibertable import load_csv
from ..geometry import Pose6DoF, fiber_to_cylinder, pinch_scale  # noqa: F401 (zoom shared)
from ..render import Camera, GRAYSCALE_TF, ImageRGBA, TransferFunction, look_at, render_dvr, render_mip
from ..tracking import detect_markers, pose_from_euler, png_to_frame, render_marker_frame
from ..volume import extract_slice, load_volume
from .registry import ServiceRegistry
from .state import PlacedView, Session, Workspace, WorkspaceStore, validate_view_params

MAX_RENDER_SIZE = 1024


def _error_response(exc: XctlabError, status: int = 400) -> JSONResponse:
    return JSONResponse(status_code=status, content={
        "error": type(exc).__name__.removesuffix("Error"), "detail": str(exc)})


def _parse_camera(raw: str | None) -> Camera:
    if not raw:
        return look_at((0.0, 0.0, 400.0), (0.0, 0.0, 0.0), fov_deg=45.0)
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError:
        raise BadParamsError("camera must be a JSON object") from None
    if "position" in payload:
        return look_at(payload["position"], payload.get("look_at", (0.0, 0.0, 0.0)),
                       up=payload.get("up", (0.0, 1.0, 0.0)),
                       fov_deg=float(payload.get("fov_deg", 45.0)),
                       near=float(payload.get("near", 0.1)))
    try:
        return Camera.from_dict(payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise BadParamsError(f"bad camera: {exc}") from None


def _parse_tf(raw: str | None) -> TransferFunction:
    if not raw:
        return GRAYSCALE_TF
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError:
        raise BadTFError("transfer function must be JSON") from None
    return TransferFunction.from_dict(payload)


def compute_chart(view: PlacedView, session: Session) -> dict:
    table = session.require_table()
    kind, params = view.kind, view.params
    if kind == "histogram":
        result = charts.histogram(table.column(params["column"]),
                                  charts.HistogramSpec(bin_count=params.get("bins", 16)))
        payload = result.to_dict()
        payload["column"] = params["column"]
        return payload
    if kind == "scatter3":
        return charts.scatter3(table, params["x"], params["y"], params["z"]).to_dict()
    if kind == "density":
        return dict(charts.density(table.column(params["column"]),
                                   params.get("bandwidth", "auto")).to_dict(),
                    column=params["column"])
    if kind == "bar":
        return charts.bar_aggregate(table, params["group"], params.get("value"),
                                    params.get("agg", "count"),
                                    classes=params.get("classes", 5)).to_dict()
    raise BadParamsError(f"view kind {kind!r} has no chart data")


class EngineState:
    """Shared service state: registry, sessions, workspace persistence."""

    def __init__(self, registry: ServiceRegistry, workspace_dir: Path):
        self.registry = registry
        self.store = WorkspaceStore(workspace_dir)
        self.sessions: dict[str, Session] = {}

    def create_session(self, workspace_id: str | None) -> tuple[Session, bool]:
        sid = uuid.uuid4().hex[:12]
        wid = workspace_id or sid
        workspace = self.store.load(wid)
        restored = workspace is not None
        session = Session(sid, wid, workspace or Workspace())
        if restored and session.workspace.active_dataset:
            self._load_dataset(session, session.workspace.active_dataset, emit=False)
        self.sessions[sid] = session
        return session, restored

    def session(self, sid: str) -> Session:
        if sid not in self.sessions:
            raise ServiceError(f"unknown session {sid!r}")
        return self.sessions[sid]

    def persist(self, session: Session) -> None:
        self.store.save(session.workspace_id, session.workspace)

    def _load_dataset(self, session: Session, dataset_id: str, emit: bool = True) -> None:
        entry = self.registry.get(dataset_id)
        session.volume = load_volume(entry.volume_path, entry.meta_path)
        session.table = load_csv(entry.csv_path) if entry.csv_path else None
        session.workspace.active_dataset = dataset_id
        if not session.workspace.views:
            for spec in entry.default_views:
                view = PlacedView(view_id=session.workspace.next_view_id,
                                  kind=spec["kind"], params=dict(spec.get("params", {})),
                                  pose=Pose6DoF.from_dict(spec.get("pose", {})))
                validate_view_params(view.kind, view.params)
                session.workspace.views.append(view)
                session.workspace.next_view_id += 1
                if emit:
                    session.emit("view-changed", {"view_id": view.view_id, "action": "placed"})
        if emit:
            session.emit("dataset-changed", {
                "dataset": dataset_id, "display_name": entry.display_name})

    def ingest_frame(self, session: Session, png: bytes) -> dict:
        frame = png_to_frame(png)
        detections = detect_markers(frame, self.registry.intrinsics, self.registry.dictionary)
        report: dict = {
            "detections": [d.to_dict() for d in detections],
            "events": [],
            "unresolved": [],
            "loaded": False,
        }
        with session.lock:
            resolved = []
            for det in detections:
                try:
                    resolved.append((det, self.registry.resolve_marker(det.marker_id)))
                except UnknownMarkerError:
                    report["unresolved"].append(det.marker_id)
            if resolved:
                best, dataset_id = min(
                    resolved, key=lambda pair: (pair[0].bit_errors, pair[0].marker_id))
                if dataset_id != session.workspace.active_dataset:
                    self._load_dataset(session, dataset_id)
                    report["loaded"] = True
                    report["events"].append("dataset-changed")
                session.workspace.sample_pose = best.pose
                session.emit("pose", {"pose": best.pose.to_dict(),
                                      "marker_id": best.marker_id})
                report["events"].append("pose")
                self.persist(session)
            report["active_dataset"] = session.workspace.active_dataset
            report["sample_pose"] = session.workspace.sample_pose.to_dict()
        return report


def create_app(registry: ServiceRegistry, workspace_dir: Path,
               ui_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="xctlab service")
    state = EngineState(registry, Path(workspace_dir))
    app.state.engine = state

    @app.exception_handler(XctlabError)
    async def _handle_engine_error(request: Request, exc: XctlabError):
        status = 404 if isinstance(exc, (UnknownDatasetError, UnknownMarkerError)) else 400
        return _error_response(exc, status)

    @app.get("/datasets")
    def list_datasets():
        return {"datasets": [e.to_dict() for e in state.registry.datasets]}

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await request.body()
        payload = json.loads(body) if body else {}
        session, restored = state.create_session(payload.get("workspace_id"))
        return {"session_id": session.session_id, "workspace_id": session.workspace_id,
                "restored": restored}

    @app.get("/sessions/{sid}")
    def session_state(sid: str):
        session = state.session(sid)
        with session.lock:
            return {
                "session_id": session.session_id,
                "workspace_id": session.workspace_id,
                "workspace": session.workspace.to_dict(),
                "event_count": len(session.events),
            }

    @app.post("/sessions/{sid}/frames")
    async def post_frame(sid: str, request: Request):
        session = state.session(sid)
        png = await request.body()
        if not png:
            raise BadParamsError("frame body is empty")
        return state.ingest_frame(session, png)

    @app.get("/sessions/{sid}/render")
    def get_render(sid: str, request: Request, mode: str = "mip", w: int = 256, h: int = 256,
                   camera: str | None = None, tf: str | None = None,
                   use_sample_pose: bool = True):
        session = state.session(sid)
        volume = session.require_volume()
        if mode not in ("mip", "dvr"):
            raise BadParamsError("mode must be mip or dvr")
        if not (1 <= w <= MAX_RENDER_SIZE and 1 <= h <= MAX_RENDER_SIZE):
            raise BadParamsError(f"render size must be within {MAX_RENDER_SIZE}")
        cam = _parse_camera(camera)
        model = session.workspace.sample_pose if use_sample_pose else Pose6DoF()
        if mode == "mip":
            image = render_mip(volume, cam, w, h, model=model)
        else:
            image = render_dvr(volume, _parse_tf(tf), cam, w, h, model=model)
        digest = image.content_hash()
        if request.headers.get("if-none-match") == digest:
            return Response(status_code=304)
        return Response(content=image.to_png(), media_type="image/png",
                        headers={"ETag": digest, "X-Content-Hash": digest})

    @app.get("/sessions/{sid}/slice")
    def get_slice(sid: str, axis: str = "z", index: int = 0):
        session = state.session(sid)
        volume = session.require_volume()
        img = extract_slice(volume, axis, index)
        from ..volume import normalize_scalars

        gray = normalize_scalars(img.as_array(), volume.meta.dtype)
        rgba = np.repeat(np.rint(np.clip(gray, 0, 1) * 255).astype(np.uint8)[..., None], 3, axis=-1)
        rgba = np.concatenate([rgba, np.full_like(rgba[..., :1], 255)], axis=-1)
        png = ImageRGBA(width=img.width, height=img.height, rgba=rgba.tobytes()).to_png()
        return Response(content=png, media_type="image/png")

    @app.get("/sessions/{sid}/volume/histogram")
    def volume_histogram(sid: str, bins: int = 64):
        session = state.session(sid)
        return charts.intensity_histogram(session.require_volume(), bins).to_dict()

    @app.get("/sessions/{sid}/charts/{view_id}")
    def chart_data(sid: str, view_id: int):
        session = state.session(sid)
        with session.lock:
            view = session.workspace.view(view_id)
            payload = compute_chart(view, session)
            payload["view_id"] = view_id
            return payload

    @app.post("/sessions/{sid}/views")
    async def place_view(sid: str, request: Request):
        session = state.session(sid)
        payload = json.loads(await request.body())
        kind = payload.get("kind")
        params = dict(payload.get("params", {}))
        validate_view_params(kind, params)
        if kind in ("histogram", "scatter3", "density", "bar"):
            session.require_table()  # views over the table need one loaded
        with session.lock:
            view = PlacedView(view_id=session.workspace.next_view_id, kind=kind,
                              params=params, pose=Pose6DoF.from_dict(payload.get("pose", {})))
            session.workspace.views.append(view)
            session.workspace.next_view_id += 1
            session.emit("view-changed", {"view_id": view.view_id, "action": "placed"})
            state.persist(session)
        return {"view_id": view.view_id}

    @app.patch("/sessions/{sid}/views/{view_id}")
    async def move_view(sid: str, view_id: int, request: Request):
        session = state.session(sid)
        payload = json.loads(await request.body())
        with session.lock:
            view = session.workspace.view(view_id)
            if "pose" in payload:
                view.pose = Pose6DoF.from_dict(payload["pose"])
            session.emit("view-changed", {"view_id": view_id, "action": "moved"})
            state.persist(session)
        return {"ok": True}

    @app.delete("/sessions/{sid}/views/{view_id}")
    def delete_view(sid: str, view_id: int):
        session = state.session(sid)
        with session.lock:
            view = session.workspace.view(view_id)
            session.workspace.views.remove(view)
            session.emit("view-changed", {"view_id": view_id, "action": "deleted"})
            state.persist(session)
        return {"ok": True}

    @app.get("/sessions/{sid}/meshes")
    def meshes(sid: str, segments: int = 16, limit: int = 500):
        session = state.session(sid)
        table = session.require_table()
        payloads = []
        for rec in list(table)[:limit]:
            if rec.straight_length <= 0:
                continue
            payloads.append(fiber_to_cylinder(rec, segments=segments).to_payload())
        return {"meshes": payloads, "total": len(table)}

    @app.get("/sessions/{sid}/events")
    async def events(sid: str, after: int = 0, limit: int | None = None,
                     timeout: float | None = None):
        session = state.session(sid)

        async def stream():
            sent = 0
            cursor = after
            waited = 0.0
            poll = 0.02
            while True:
                batch = session.events_after(cursor)
                for event in batch:
                    cursor = event["seq"]
                    sent += 1
                    yield (f"id: {event['seq']}\n"
                           f"event: {event['event']}\n"
                           f"data: {json.dumps(event['data'])}\n\n")
                    if limit is not None and sent >= limit:
                        return
                if not batch:
                    await asyncio.sleep(poll)
                    waited += poll
                    if timeout is not None and waited >= timeout:
                        return

        return StreamingResponse(stream(), media_type="text/event-stream",
                                 headers={"Cache-Control": "no-cache"})

    @app.get("/demo/frame")
    def demo_frame(dataset: str = "", index: int = 0, w: int | None = None,
                   h: int | None = None, blank: bool = False):
        """Deterministic synthetic camera frames for replay (desk-scale
        stand-in for picking up the physical sample)."""
        intr = state.registry.intrinsics
        w = w or int(round(2 * intr.cx))
        h = h or int(round(2 * intr.cy))
        if blank or not dataset:
            frame = np.full((h, w), 0.55)
        else:
            entry = state.registry.get(dataset)
            if not entry.marker_ids:
                raise BadParamsError(f"dataset {dataset!r} has no markers")
            marker = state.registry.dictionary.get(entry.marker_ids[index % len(entry.marker_ids)])
            pose = pose_from_euler(
                8.0 * marker.side_mm * (1.0 + 0.05 * math.sin(index / 5.0)),
                tilt_deg=18.0 * math.sin(index / 7.0),
                tilt_axis=(1.0, 0.3, 0.0),
                roll_deg=4.0 * index,
                offset_mm=(25.0 * math.sin(index / 9.0), 15.0 * math.cos(index / 11.0)),
            )
            frame = render_marker_frame([(marker, pose)], intr, w, h)
        from ..tracking import frame_to_png

        return Response(content=frame_to_png(frame), media_type="image/png")

    if ui_dir is not None and Path(ui_dir).exists():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
