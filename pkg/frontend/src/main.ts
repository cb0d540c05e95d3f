/** DOM wiring for the workbench: viewport, chart panels, replay, events. */

import { ApiClient } from "./api.js";
import { layoutBar, layoutDensity, layoutHistogram, type ChartLayout } from "./charts2d.js";
import { EventStream } from "./events.js";
import {
  BASE_PANEL,
  defaultPosition,
  dragPanel,
  isIdentityPlacement,
  poseFromRect,
  rectFromPose,
  resizePanel,
  type PanelRect,
} from "./panels.js";
import { replayFrames } from "./replay.js";
import {
  DEFAULT_SCATTER_VIEW,
  projectScatter,
  rotateView,
  type ScatterView,
} from "./scatter3.js";
import { initialState, reduce, setConnected, type AppState } from "./state.js";
import type { ChartPayload, Scatter3Payload, ViewJson } from "./types.js";
import { ViewportController } from "./viewport.js";
import { defaultOrbit, orbitCamera, orbitDrag, orbitPan, orbitZoom, type OrbitState } from "./zoom.js";

const api = new ApiClient("");

interface PanelDom {
  view: ViewJson;
  rect: PanelRect;
  root: HTMLDivElement;
  canvas: HTMLCanvasElement;
  scatterView: ScatterView;
  payload?: ChartPayload;
}

class Workbench {
  state: AppState = initialState();
  sessionId = "";
  orbit: OrbitState = defaultOrbit(120);
  panels = new Map<number, PanelDom>();
  viewport!: ViewportController<ReturnType<typeof orbitCamera>, Blob>;
  renderMode: "mip" | "dvr" = "mip";

  readonly viewportImg = document.getElementById("viewport-img") as HTMLImageElement;
  readonly panelHost = document.getElementById("panels") as HTMLDivElement;
  readonly banner = document.getElementById("banner") as HTMLDivElement;
  readonly statusEl = document.getElementById("status") as HTMLSpanElement;
  readonly logEl = document.getElementById("replay-log") as HTMLPreElement;

  async start(): Promise<void> {
    const workspaceId = localStorage.getItem("xctlab-workspace") ?? `bench-${Date.now()}`;
    localStorage.setItem("xctlab-workspace", workspaceId);
    const info = await api.createSession(workspaceId);
    this.sessionId = info.session_id;

    this.viewport = new ViewportController({
      render: async (req) => {
        const url = api.renderUrl(this.sessionId, this.renderMode, 384, 288, req.camera);
        const { blob } = await api.fetchRender(url);
        return blob;
      },
      present: (blob) => {
        const old = this.viewportImg.src;
        this.viewportImg.src = URL.createObjectURL(blob);
        if (old.startsWith("blob:")) URL.revokeObjectURL(old);
      },
      onError: () => this.setBanner("render failed", true),
    });

    await this.populateDatasets();
    this.wireViewportControls();
    this.wireToolbar();
    this.subscribeEvents();
    await this.syncWorkspace();
  }

  setBanner(text: string, visible: boolean): void {
    this.banner.textContent = text;
    this.banner.classList.toggle("hidden", !visible);
  }

  async populateDatasets(): Promise<void> {
    const { datasets } = await api.listDatasets();
    const select = document.getElementById("dataset-list") as HTMLSelectElement;
    select.innerHTML = "";
    for (const d of datasets) {
      const opt = document.createElement("option");
      opt.value = d.id;
      opt.textContent = `${d.display_name} (${d.markers.length} targets)`;
      select.appendChild(opt);
    }
  }

  subscribeEvents(): void {
    const stream = new EventStream(this.sessionId, {
      onEvent: (event) => {
        this.state = reduce(this.state, event);
        if (event.event === "pose") {
          this.requestRender();
        } else if (event.event === "dataset-changed") {
          this.statusEl.textContent = `dataset: ${this.state.datasetDisplayName}`;
          void this.syncWorkspace();
          this.requestRender();
        } else {
          void this.syncWorkspace();
        }
      },
      onConnectionChange: (connected) => {
        this.state = setConnected(this.state, connected);
        this.setBanner("server connection lost - retrying", !connected);
      },
    });
    stream.connect();
  }

  requestRender(): void {
    if (!this.state.activeDataset) return;
    this.viewport.request(orbitCamera(this.orbit));
  }

  wireViewportControls(): void {
    const surface = document.getElementById("viewport") as HTMLDivElement;
    let dragging = false;
    let panning = false;
    let lastX = 0;
    let lastY = 0;
    surface.addEventListener("pointerdown", (ev) => {
      dragging = !ev.shiftKey;
      panning = ev.shiftKey;
      lastX = ev.clientX;
      lastY = ev.clientY;
      surface.setPointerCapture(ev.pointerId);
    });
    surface.addEventListener("pointermove", (ev) => {
      if (!dragging && !panning) return;
      const dx = ev.clientX - lastX;
      const dy = ev.clientY - lastY;
      lastX = ev.clientX;
      lastY = ev.clientY;
      this.orbit = dragging ? orbitDrag(this.orbit, dx, dy) : orbitPan(this.orbit, dx, dy);
      this.requestRender();
    });
    surface.addEventListener("pointerup", () => {
      dragging = panning = false;
    });
    surface.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      this.orbit = orbitZoom(this.orbit, ev.deltaY);
      this.requestRender();
    });
  }

  wireToolbar(): void {
    (document.getElementById("mode-toggle") as HTMLButtonElement).addEventListener(
      "click",
      (ev) => {
        this.renderMode = this.renderMode === "mip" ? "dvr" : "mip";
        (ev.target as HTMLButtonElement).textContent = this.renderMode.toUpperCase();
        this.requestRender();
      },
    );
    (document.getElementById("replay-btn") as HTMLButtonElement).addEventListener(
      "click",
      () => void this.runReplay(),
    );
    (document.getElementById("add-chart") as HTMLButtonElement).addEventListener(
      "click",
      () => void this.addHistogram(),
    );
  }

  async runReplay(): Promise<void> {
    const select = document.getElementById("dataset-list") as HTMLSelectElement;
    const datasets = Array.from(select.options).map((o) => o.value);
    this.logEl.textContent = "";
    const result = await replayFrames(api, this.sessionId, datasets, 3, (entry) => {
      const line = entry.ok
        ? `#${entry.index} ${entry.dataset}: ${entry.events.join(", ") || "no detection"}`
        : `#${entry.index} ${entry.dataset}: ERROR ${entry.error}`;
      this.logEl.textContent += line + "\n";
    });
    this.logEl.textContent += `dataset switches: ${result.datasetSwitches}\n`;
  }

  async addHistogram(): Promise<void> {
    const column = (document.getElementById("column-input") as HTMLInputElement).value
      || "straight_length";
    try {
      await api.placeView(this.sessionId, "histogram", { column, bins: 16 });
    } catch (err) {
      this.setBanner(err instanceof Error ? err.message : String(err), true);
      setTimeout(() => this.setBanner("", false), 2500);
    }
  }

  async syncWorkspace(): Promise<void> {
    const snapshot = await api.sessionState(this.sessionId);
    const alive = new Set<number>();
    let index = 0;
    for (const view of snapshot.workspace.views) {
      alive.add(view.view_id);
      if (!["histogram", "scatter3", "bar", "density"].includes(view.kind)) continue;
      let panel = this.panels.get(view.view_id);
      if (!panel) {
        panel = this.createPanel(view, index);
        this.panels.set(view.view_id, panel);
      }
      panel.view = view;
      if (!isIdentityPlacement(view.pose)) {
        panel.rect = rectFromPose(view);
      }
      this.applyRect(panel);
      await this.refreshChart(panel);
      index += 1;
    }
    for (const [viewId, panel] of [...this.panels]) {
      if (!alive.has(viewId)) {
        panel.root.remove();
        this.panels.delete(viewId);
      }
    }
  }

  createPanel(view: ViewJson, index: number): PanelDom {
    const root = document.createElement("div");
    root.className = "panel";
    const header = document.createElement("div");
    header.className = "panel-header";
    header.textContent = `#${view.view_id} ${view.kind}`;
    const close = document.createElement("button");
    close.textContent = "x";
    close.addEventListener("click", () => void api.deleteView(this.sessionId, view.view_id));
    header.appendChild(close);
    const canvas = document.createElement("canvas");
    canvas.width = BASE_PANEL.width;
    canvas.height = BASE_PANEL.height - 24;
    const grip = document.createElement("div");
    grip.className = "panel-grip";
    root.append(header, canvas, grip);
    this.panelHost.appendChild(root);

    const pos = defaultPosition(index);
    const panel: PanelDom = {
      view,
      rect: {
        viewId: view.view_id,
        x: pos.x,
        y: pos.y,
        width: BASE_PANEL.width,
        height: BASE_PANEL.height,
        scale: 1,
      },
      root,
      canvas,
      scatterView: { ...DEFAULT_SCATTER_VIEW },
    };
    this.wirePanelDrag(panel, header, grip, canvas);
    return panel;
  }

  wirePanelDrag(panel: PanelDom, header: HTMLDivElement, grip: HTMLDivElement,
                canvas: HTMLCanvasElement): void {
    let mode: "none" | "drag" | "resize" | "rotate" = "none";
    let lastX = 0;
    let lastY = 0;
    let startDist = 0;
    const down = (ev: PointerEvent, m: typeof mode) => {
      mode = m;
      lastX = ev.clientX;
      lastY = ev.clientY;
      const cx = panel.rect.x + panel.rect.width / 2;
      const cy = panel.rect.y + panel.rect.height / 2;
      startDist = Math.max(8, Math.hypot(ev.clientX - cx, ev.clientY - cy));
      (ev.target as Element).setPointerCapture(ev.pointerId);
      ev.preventDefault();
    };
    header.addEventListener("pointerdown", (ev) => down(ev, "drag"));
    grip.addEventListener("pointerdown", (ev) => down(ev, "resize"));
    canvas.addEventListener("pointerdown", (ev) => {
      if (panel.view.kind === "scatter3") down(ev, "rotate");
    });
    const move = (ev: PointerEvent) => {
      if (mode === "none") return;
      const dx = ev.clientX - lastX;
      const dy = ev.clientY - lastY;
      lastX = ev.clientX;
      lastY = ev.clientY;
      if (mode === "drag") {
        panel.rect = dragPanel(panel.rect, dx, dy);
        this.applyRect(panel);
      } else if (mode === "resize") {
        const cx = panel.rect.x + panel.rect.width / 2;
        const cy = panel.rect.y + panel.rect.height / 2;
        const dist = Math.max(8, Math.hypot(ev.clientX - cx, ev.clientY - cy));
        panel.rect = resizePanel(panel.rect, startDist, dist);
        startDist = dist;
        this.applyRect(panel);
      } else if (mode === "rotate") {
        panel.scatterView = rotateView(panel.scatterView, dx, dy);
        this.drawPanel(panel);
      }
    };
    const up = () => {
      if (mode === "drag" || mode === "resize") {
        void api.moveView(this.sessionId, panel.view.view_id,
                          poseFromRect(panel.rect, panel.view.pose));
      }
      mode = "none";
    };
    for (const el of [header, grip, canvas]) {
      el.addEventListener("pointermove", move as EventListener);
      el.addEventListener("pointerup", up as EventListener);
    }
  }

  applyRect(panel: PanelDom): void {
    panel.root.style.left = `${panel.rect.x}px`;
    panel.root.style.top = `${panel.rect.y}px`;
    panel.root.style.width = `${panel.rect.width}px`;
    panel.root.style.height = `${panel.rect.height}px`;
    panel.canvas.width = Math.max(40, Math.round(panel.rect.width));
    panel.canvas.height = Math.max(30, Math.round(panel.rect.height - 24));
    this.drawPanel(panel);
  }

  async refreshChart(panel: PanelDom): Promise<void> {
    try {
      panel.payload = await api.chart(this.sessionId, panel.view.view_id);
      this.drawPanel(panel);
    } catch {
      /* table not loaded yet; a later dataset-changed event retries */
    }
  }

  drawPanel(panel: PanelDom): void {
    const ctx = panel.canvas.getContext("2d");
    if (!ctx || !panel.payload) return;
    const { width, height } = panel.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.font = "10px sans-serif";
    if (panel.payload.kind === "scatter3") {
      this.drawScatter(ctx, panel.payload, panel.scatterView, width, height);
      return;
    }
    let layout: ChartLayout;
    if (panel.payload.kind === "histogram") {
      layout = layoutHistogram(panel.payload, width, height);
    } else if (panel.payload.kind === "bar") {
      layout = layoutBar(panel.payload, width, height);
    } else {
      layout = layoutDensity(panel.payload, width, height);
    }
    ctx.fillStyle = "#4a90d9";
    for (const r of layout.rects) {
      ctx.fillRect(r.x, r.y, Math.max(1, r.w - 1), r.h);
    }
    if (layout.polyline.length > 1) {
      ctx.strokeStyle = "#4a90d9";
      ctx.beginPath();
      ctx.moveTo(layout.polyline[0][0], layout.polyline[0][1]);
      for (const [x, y] of layout.polyline.slice(1)) ctx.lineTo(x, y);
      ctx.stroke();
    }
    ctx.fillStyle = "#ccc";
    for (const t of layout.ticks) ctx.fillText(t.text, t.x, t.y);
  }

  drawScatter(ctx: CanvasRenderingContext2D, payload: Scatter3Payload,
              view: ScatterView, width: number, height: number): void {
    const scene = projectScatter(payload, view, width, height);
    ctx.strokeStyle = "#666";
    ctx.fillStyle = "#aaa";
    for (const axis of scene.axes) {
      ctx.beginPath();
      ctx.moveTo(axis.x0, axis.y0);
      ctx.lineTo(axis.x1, axis.y1);
      ctx.stroke();
      ctx.fillText(axis.label, axis.x1 + 2, axis.y1);
    }
    for (const p of scene.points) {
      const size = 2 + (p.depth + 1) * 1.5;
      const shade = Math.round(120 + (p.depth + 1) * 60);
      ctx.fillStyle = `rgb(${shade - 60}, ${shade}, 255)`;
      ctx.fillRect(p.x - size / 2, p.y - size / 2, size, size);
    }
  }
}

const app = new Workbench();
void app.start().catch((err) => {
  const banner = document.getElementById("banner");
  if (banner) {
    banner.textContent = `failed to start: ${err instanceof Error ? err.message : err}`;
    banner.classList.remove("hidden");
  }
});
