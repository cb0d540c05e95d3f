import { describe, expect, it } from "vitest";

import {
  defaultOrbit,
  orbitCamera,
  orbitDrag,
  orbitZoom,
  pinchScale,
  wheelRatio,
} from "../src/zoom.js";

describe("pinchScale", () => {
  it("equal distances leave scale unchanged", () => {
    expect(pinchScale(3, 3, 1.7)).toBe(1.7);
  });

  it("doubling distance doubles scale", () => {
    expect(pinchScale(1, 2, 1)).toBe(2);
  });

  it("clamps at both ends", () => {
    expect(pinchScale(1, 1000, 1)).toBe(50);
    expect(pinchScale(1000, 1, 1)).toBe(0.05);
  });

  it("inverse gesture restores scale when unclamped", () => {
    const s = pinchScale(2, 5, 1.3);
    expect(pinchScale(5, 2, s)).toBeCloseTo(1.3, 12);
  });

  it("rejects non-positive distances", () => {
    expect(() => pinchScale(0, 1, 1)).toThrow();
  });
});

describe("wheel zoom", () => {
  it("wheel down zooms out, wheel up zooms in (x1.1 per 120 units)", () => {
    expect(wheelRatio(-120).d1).toBeCloseTo(1.1, 12);
    expect(wheelRatio(120).d1).toBeCloseTo(1 / 1.1, 12);
  });

  it("wheel x2 equivalent doubles the requested camera scale", () => {
    // Two ticks of -120 then distance ratio check: zooming in by r means
    // the camera distance divides by r.
    const orbit = defaultOrbit(100);
    const once = orbitZoom(orbit, -120);
    expect(orbit.distance / once.distance).toBeCloseTo(1.1, 12);
    const base = defaultOrbit(100);
    const doubled = orbitZoom({ ...base, distance: 250 }, -Math.log(2) / Math.log(1.1) * 120);
    expect(250 / doubled.distance).toBeCloseTo(2, 6);
  });
});

describe("orbit camera", () => {
  it("default camera sits on +z looking at the target", () => {
    const cam = orbitCamera({ azimuth: 0, elevation: 0, distance: 10, target: [0, 0, 0] });
    expect(cam.position[0]).toBeCloseTo(0, 12);
    expect(cam.position[1]).toBeCloseTo(0, 12);
    expect(cam.position[2]).toBeCloseTo(10, 12);
    expect(cam.look_at).toEqual([0, 0, 0]);
  });

  it("azimuth 90deg moves the camera to +x", () => {
    const cam = orbitCamera({
      azimuth: Math.PI / 2,
      elevation: 0,
      distance: 5,
      target: [1, 2, 3],
    });
    expect(cam.position[0]).toBeCloseTo(6, 12);
    expect(cam.position[1]).toBeCloseTo(2, 12);
    expect(cam.position[2]).toBeCloseTo(3, 12);
  });

  it("drag changes azimuth/elevation with clamped elevation", () => {
    let orbit = defaultOrbit(100);
    orbit = orbitDrag(orbit, 100, 0);
    expect(orbit.azimuth).toBeGreaterThan(0.35);
    for (let i = 0; i < 100; i++) orbit = orbitDrag(orbit, 0, 1000);
    expect(orbit.elevation).toBeLessThan(Math.PI / 2);
  });

  it("camera distance stays positive under extreme zoom", () => {
    let orbit = defaultOrbit(100);
    for (let i = 0; i < 200; i++) orbit = orbitZoom(orbit, -1200);
    expect(orbit.distance).toBeGreaterThan(0);
  });
});
