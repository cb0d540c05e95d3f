import { describe, expect, it } from "vitest";

import {
  BASE_PANEL,
  defaultPosition,
  dragPanel,
  isIdentityPlacement,
  poseFromRect,
  rectFromPose,
  resizePanel,
} from "../src/panels.js";
import { defaultWorkspace } from "./fixtures.js";

describe("panel <-> pose mapping", () => {
  it("rect from a persisted pose restores center and scale", () => {
    const view = defaultWorkspace().views[0];
    const rect = rectFromPose(view);
    expect(rect.x + rect.width / 2).toBeCloseTo(view.pose.translation[0], 9);
    expect(rect.y + rect.height / 2).toBeCloseTo(view.pose.translation[1], 9);
    expect(rect.scale).toBe(1);
  });

  it("drag then persist then restore reproduces the rectangle", () => {
    const view = defaultWorkspace().views[0];
    const dragged = dragPanel(rectFromPose(view), 37, -12);
    const patched = { ...view, pose: poseFromRect(dragged, view.pose) };
    const restored = rectFromPose(patched);
    expect(restored.x).toBeCloseTo(dragged.x, 9);
    expect(restored.y).toBeCloseTo(dragged.y, 9);
    expect(restored.width).toBeCloseTo(dragged.width, 9);
  });

  it("resize uses the pinch metaphor and keeps the center", () => {
    const view = defaultWorkspace().views[1];
    const rect = rectFromPose(view);
    const cx = rect.x + rect.width / 2;
    const grown = resizePanel(rect, 100, 200);
    expect(grown.scale).toBeCloseTo(2, 12);
    expect(grown.width).toBeCloseTo(BASE_PANEL.width * 2, 9);
    expect(grown.x + grown.width / 2).toBeCloseTo(cx, 9);
  });

  it("resize clamps at the zoom bounds", () => {
    const view = defaultWorkspace().views[1];
    let rect = rectFromPose(view);
    for (let i = 0; i < 30; i++) rect = resizePanel(rect, 100, 500);
    expect(rect.scale).toBe(50);
  });

  it("pose payload carries rotation through untouched", () => {
    const view = defaultWorkspace().views[2];
    const pose = poseFromRect(rectFromPose(view), view.pose);
    expect(pose.rotation).toEqual(view.pose.rotation);
    expect(pose.translation[2]).toBe(view.pose.translation[2]);
  });

  it("identity placement detection drives the default flow layout", () => {
    expect(isIdentityPlacement({ rotation: [1, 0, 0, 0], translation: [0, 0, 0], scale: 1 }))
      .toBe(true);
    expect(isIdentityPlacement(defaultWorkspace().views[0].pose)).toBe(false);
    const p0 = defaultPosition(0);
    const p1 = defaultPosition(1);
    const p2 = defaultPosition(2);
    expect(p1.x).toBeGreaterThan(p0.x);
    expect(p2.y).toBeGreaterThan(p0.y);
  });
});
