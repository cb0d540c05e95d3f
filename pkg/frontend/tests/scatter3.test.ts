import { describe, expect, it } from "vitest";

import { projectScatter, rotateView } from "../src/scatter3.js";
import type { Scatter3Payload } from "../src/types.js";
import { scatterPayload } from "./fixtures.js";

function tinyPayload(x: number[], y: number[], z: number[]): Scatter3Payload {
  return {
    kind: "scatter3",
    x,
    y,
    z,
    labels: ["a", "b", "c"],
    units: ["", "", ""],
    dropped: 0,
  };
}

describe("projectScatter", () => {
  it("identity view maps x right and y up", () => {
    const payload = tinyPayload([0, 1], [0, 1], [0, 0]);
    const scene = projectScatter(payload, { yaw: 0, pitch: 0, zoom: 1 }, 200, 200);
    const byIndex = [...scene.points].sort((a, b) => a.index - b.index);
    expect(byIndex[1].x).toBeGreaterThan(byIndex[0].x); // larger data x -> right
    expect(byIndex[1].y).toBeLessThan(byIndex[0].y);    // larger data y -> up (smaller px y)
  });

  it("every input point projects (count preserved)", () => {
    const scene = projectScatter(scatterPayload(214), { yaw: 0.4, pitch: 0.3, zoom: 1 }, 320, 240);
    expect(scene.points).toHaveLength(214);
  });

  it("points are depth-sorted far to near", () => {
    const scene = projectScatter(scatterPayload(50), { yaw: 0.7, pitch: 0.2, zoom: 1 }, 320, 240);
    const depths = scene.points.map((p) => p.depth);
    const sorted = [...depths].sort((a, b) => a - b);
    expect(depths).toEqual(sorted);
  });

  it("rotated cube never clips the panel", () => {
    const payload = scatterPayload(100);
    for (const yaw of [0, 0.5, 1.2, 2.5]) {
      const scene = projectScatter(payload, { yaw, pitch: 0.8, zoom: 1 }, 300, 200);
      for (const p of scene.points) {
        expect(p.x).toBeGreaterThanOrEqual(0);
        expect(p.x).toBeLessThanOrEqual(300);
        expect(p.y).toBeGreaterThanOrEqual(0);
        expect(p.y).toBeLessThanOrEqual(200);
      }
    }
  });

  it("three labeled axes from the shared origin corner", () => {
    const scene = projectScatter(scatterPayload(10), { yaw: 0.6, pitch: 0.4, zoom: 1 }, 320, 240);
    expect(scene.axes.map((a) => a.label)).toEqual(["diameter", "surface_area", "curved_length"]);
    const origins = new Set(scene.axes.map((a) => `${a.x0.toFixed(6)},${a.y0.toFixed(6)}`));
    expect(origins.size).toBe(1);
  });

  it("constant column degenerates gracefully (no NaN)", () => {
    const payload = tinyPayload([1, 1, 1], [0, 1, 2], [3, 4, 5]);
    const scene = projectScatter(payload, { yaw: 0.2, pitch: 0.1, zoom: 1 }, 100, 100);
    for (const p of scene.points) {
      expect(Number.isFinite(p.x)).toBe(true);
      expect(Number.isFinite(p.y)).toBe(true);
    }
  });

  it("yaw rotation keeps y-axis points fixed in depth ordering sense", () => {
    // A point on the rotation axis (x=z=0 in normalized space) must not move
    // horizontally under yaw.
    const payload = tinyPayload([0, 2], [1, 1], [0, 2]);
    // normalized: point0 -> (-1,*, -1), point1 -> (1,*,1); midpoint is axis
    const a = projectScatter(payload, { yaw: 0.0, pitch: 0, zoom: 1 }, 200, 200);
    const b = projectScatter(payload, { yaw: 0.9, pitch: 0, zoom: 1 }, 200, 200);
    const centerA = (a.points[0].x + a.points[1].x) / 2;
    const centerB = (b.points[0].x + b.points[1].x) / 2;
    expect(centerA).toBeCloseTo(centerB, 6); // cube center stays centered
  });
});

describe("rotateView", () => {
  it("accumulates yaw and clamps pitch", () => {
    let v = { yaw: 0, pitch: 0, zoom: 1 };
    v = rotateView(v, 50, 0);
    expect(v.yaw).toBeCloseTo(0.5, 12);
    for (let i = 0; i < 100; i++) v = rotateView(v, 0, 500);
    expect(v.pitch).toBeLessThan(Math.PI / 2);
  });
});
