/** Zoom metaphor and orbit camera math.
 *
 * Mirrors the engine's two-hand zoom contract: a gesture rescales by the
 * grab-distance ratio, clamped to [0.05, 50].  Scroll wheels map to
 * distance ratios so the same rule drives desktop zooming.
 */

import type { CameraRequest } from "./api.js";

export const SCALE_MIN = 0.05;
export const SCALE_MAX = 50;

export function pinchScale(d0: number, d1: number, scale: number): number {
  if (d0 <= 0 || d1 <= 0) throw new Error("pinch distances must be positive");
  return Math.min(SCALE_MAX, Math.max(SCALE_MIN, scale * (d1 / d0)));
}

/** Wheel delta -> (d0, d1) distance pair; 120 units of wheel = x1.1. */
export function wheelRatio(deltaY: number): { d0: number; d1: number } {
  const ratio = Math.pow(1.1, -deltaY / 120);
  return { d0: 1, d1: ratio };
}

export interface OrbitState {
  /** Azimuth around the world y axis, radians. */
  azimuth: number;
  /** Elevation from the horizontal plane, radians, clamped near +-pi/2. */
  elevation: number;
  /** Distance from the target, world mm (drives zoom). */
  distance: number;
  target: [number, number, number];
}

export function defaultOrbit(extent: number): OrbitState {
  return { azimuth: 0, elevation: 0.35, distance: 2.5 * extent, target: [0, 0, 0] };
}

const ELEVATION_LIMIT = Math.PI / 2 - 0.01;

export function orbitDrag(state: OrbitState, dxPx: number, dyPx: number): OrbitState {
  const perPixel = 0.008;
  return {
    ...state,
    azimuth: state.azimuth + dxPx * perPixel,
    elevation: Math.min(
      ELEVATION_LIMIT,
      Math.max(-ELEVATION_LIMIT, state.elevation + dyPx * perPixel),
    ),
  };
}

/** Wheel zoom: the camera distance is the "grab distance" being rescaled. */
export function orbitZoom(state: OrbitState, deltaY: number): OrbitState {
  const { d0, d1 } = wheelRatio(deltaY);
  const factor = pinchScale(d0, d1, 1);
  const distance = Math.max(1e-3, state.distance / factor);
  return { ...state, distance };
}

export function orbitPan(state: OrbitState, dxPx: number, dyPx: number): OrbitState {
  const perPixel = state.distance * 0.001;
  const [tx, ty, tz] = state.target;
  // Pan in the camera's right/up plane.
  const right = [Math.cos(state.azimuth), 0, -Math.sin(state.azimuth)];
  return {
    ...state,
    target: [
      tx - dxPx * perPixel * right[0],
      ty + dyPx * perPixel,
      tz - dxPx * perPixel * right[2],
    ],
  };
}

/** Camera payload for GET /render (position orbits the target). */
export function orbitCamera(state: OrbitState, fovDeg = 45): CameraRequest {
  const ce = Math.cos(state.elevation);
  const [tx, ty, tz] = state.target;
  return {
    position: [
      tx + state.distance * ce * Math.sin(state.azimuth),
      ty + state.distance * Math.sin(state.elevation),
      tz + state.distance * ce * Math.cos(state.azimuth),
    ],
    look_at: [tx, ty, tz],
    up: [0, 1, 0],
    fov_deg: fovDeg,
  };
}
