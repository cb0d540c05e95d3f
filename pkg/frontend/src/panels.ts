/** Panel layout: screen rectangles bound to server-side view poses.
 *
 * The server's pose is the durable truth (translation x/y = panel center
 * in workspace pixels, scale = zoom factor); dragging or resizing a panel
 * produces a PATCH payload, and reloading reconstructs the exact same
 * rectangles from the persisted poses.
 */

import type { PoseJson, ViewJson } from "./types.js";
import { IDENTITY_POSE } from "./types.js";
import { pinchScale } from "./zoom.js";

export const BASE_PANEL = { width: 320, height: 240 };

export interface PanelRect {
  viewId: number;
  x: number;
  y: number;
  width: number;
  height: number;
  scale: number;
}

/** Rectangle for a server view (pose translation = center, scale = zoom). */
export function rectFromPose(view: ViewJson): PanelRect {
  const pose = view.pose ?? IDENTITY_POSE;
  const scale = pose.scale > 0 ? pose.scale : 1;
  const width = BASE_PANEL.width * scale;
  const height = BASE_PANEL.height * scale;
  return {
    viewId: view.view_id,
    x: pose.translation[0] - width / 2,
    y: pose.translation[1] - height / 2,
    width,
    height,
    scale,
  };
}

/** Pose payload for a panel rectangle (inverse of rectFromPose). */
export function poseFromRect(rect: PanelRect, previous?: PoseJson): PoseJson {
  const base = previous ?? IDENTITY_POSE;
  return {
    rotation: base.rotation,
    translation: [rect.x + rect.width / 2, rect.y + rect.height / 2, base.translation[2]],
    scale: rect.scale,
  };
}

export function dragPanel(rect: PanelRect, dx: number, dy: number): PanelRect {
  return { ...rect, x: rect.x + dx, y: rect.y + dy };
}

/** Resize via the zoom metaphor: the drag distance ratio rescales. */
export function resizePanel(rect: PanelRect, d0: number, d1: number): PanelRect {
  const scale = pinchScale(d0, d1, rect.scale);
  const cx = rect.x + rect.width / 2;
  const cy = rect.y + rect.height / 2;
  const width = BASE_PANEL.width * scale;
  const height = BASE_PANEL.height * scale;
  return { ...rect, scale, width, height, x: cx - width / 2, y: cy - height / 2 };
}

/** Default flow layout for panels that still carry the identity pose. */
export function defaultPosition(index: number): { x: number; y: number } {
  const cols = 2;
  const gap = 16;
  return {
    x: gap + (index % cols) * (BASE_PANEL.width + gap),
    y: gap + Math.floor(index / cols) * (BASE_PANEL.height + gap),
  };
}

export function isIdentityPlacement(pose: PoseJson): boolean {
  return pose.translation[0] === 0 && pose.translation[1] === 0 && pose.scale === 1;
}
