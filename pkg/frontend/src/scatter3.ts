/** Client-side 3D scatterplot projection.
 *
 * The one panel rendered locally from raw triples: rotation latency must
 * not round-trip to the server.  Pure math in, drawable primitives out;
 * the canvas glue just rasterizes them.
 */

import type { Scatter3Payload } from "./types.js";

export interface ScatterView {
  /** Rotation about the screen-vertical axis, radians. */
  yaw: number;
  /** Rotation about the screen-horizontal axis, radians. */
  pitch: number;
  /** Extra zoom factor applied on top of the fit-to-panel scale. */
  zoom: number;
}

export const DEFAULT_SCATTER_VIEW: ScatterView = { yaw: 0.6, pitch: 0.45, zoom: 1 };

export interface ProjectedPoint {
  x: number;
  y: number;
  /** Depth in [-1, 1] after rotation; used for size/opacity cues. */
  depth: number;
  index: number;
}

export interface ProjectedAxis {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  label: string;
  depth: number;
}

export interface ScatterScene {
  points: ProjectedPoint[];
  axes: ProjectedAxis[];
}

function normalize(values: number[]): { scale: number; offset: number } {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (!Number.isFinite(lo) || hi === lo) return { scale: 0, offset: lo };
  return { scale: 2 / (hi - lo), offset: lo };
}

function rotate(
  x: number,
  y: number,
  z: number,
  yaw: number,
  pitch: number,
): [number, number, number] {
  // Yaw about the y axis, then pitch about the x axis.
  const x1 = x * Math.cos(yaw) + z * Math.sin(yaw);
  const z1 = -x * Math.sin(yaw) + z * Math.cos(yaw);
  const y2 = y * Math.cos(pitch) - z1 * Math.sin(pitch);
  const z2 = y * Math.sin(pitch) + z1 * Math.cos(pitch);
  return [x1, y2, z2];
}

/** Project triples into panel pixel space (orthographic, depth-cued). */
export function projectScatter(
  payload: Scatter3Payload,
  view: ScatterView,
  width: number,
  height: number,
): ScatterScene {
  const nx = normalize(payload.x);
  const ny = normalize(payload.y);
  const nz = normalize(payload.z);
  const cx = width / 2;
  const cy = height / 2;
  // sqrt(3) head-room so a rotated unit cube never clips.
  const base = (Math.min(width, height) / (2 * Math.sqrt(3))) * view.zoom;

  const points: ProjectedPoint[] = [];
  for (let i = 0; i < payload.x.length; i++) {
    const ux = nx.scale === 0 ? 0 : (payload.x[i] - nx.offset) * nx.scale - 1;
    const uy = ny.scale === 0 ? 0 : (payload.y[i] - ny.offset) * ny.scale - 1;
    const uz = nz.scale === 0 ? 0 : (payload.z[i] - nz.offset) * nz.scale - 1;
    const [rx, ry, rz] = rotate(ux, uy, uz, view.yaw, view.pitch);
    points.push({
      x: cx + rx * base,
      y: cy - ry * base,
      depth: Math.max(-1, Math.min(1, rz / Math.sqrt(3))),
      index: i,
    });
  }
  points.sort((a, b) => a.depth - b.depth); // draw far points first

  const axes: ProjectedAxis[] = [];
  const ends: Array<[number, number, number, string]> = [
    [1, -1, -1, payload.labels[0]],
    [-1, 1, -1, payload.labels[1]],
    [-1, -1, 1, payload.labels[2]],
  ];
  const [ox, oy] =projectCorner(-1, -1, -1, view, cx, cy, base);
  for (const [ex, ey, ez, label] of ends) {
    const [px, py, pz] = rotate(ex, ey, ez, view.yaw, view.pitch);
    axes.push({
      x0: ox,
      y0: oy,
      x1: cx + px * base,
      y1: cy - py * base,
      label,
      depth: pz,
    });
  }
  return { points, axes };
}

function projectCorner(
  x: number,
  y: number,
  z: number,
  view: ScatterView,
  cx: number,
  cy: number,
  base: number,
): [number, number, number] {
  const [rx, ry, rz] = rotate(x, y, z, view.yaw, view.pitch);
  return [cx + rx * base, cy - ry * base, rz];
}

export function rotateView(view: ScatterView, dxPx: number, dyPx: number): ScatterView {
  const perPixel = 0.01;
  const limit = Math.PI / 2 - 0.01;
  return {
    ...view,
    yaw: view.yaw + dxPx * perPixel,
    pitch: Math.min(limit, Math.max(-limit, view.pitch + dyPx * perPixel)),
  };
}
