import { describe, expect, it } from "vitest";

import { stepPolyline } from "../src/overlay.js";
import { blockCell } from "../src/minimap.js";
import { clampLatitude, decodeBitmap, ViewerState, wrapLongitude } from "../src/state.js";

describe("gaze arithmetic", () => {
  it("wraps longitude into [-pi, pi)", () => {
    expect(wrapLongitude(Math.PI)).toBeCloseTo(-Math.PI, 12);
    expect(wrapLongitude(3 * Math.PI + 0.1)).toBeCloseTo(-Math.PI + 0.1, 12);
    expect(wrapLongitude(-Math.PI)).toBeCloseTo(-Math.PI, 12);
  });

  it("clamps latitude to the poles", () => {
    expect(clampLatitude(2.2)).toBeCloseTo(Math.PI / 2, 12);
    expect(clampLatitude(-9)).toBeCloseTo(-Math.PI / 2, 12);
  });

  it("pan and zoom stay in range", () => {
    const s = new ViewerState();
    s.pan(7.5, 4.0);
    expect(s.longitude).toBeGreaterThanOrEqual(-Math.PI);
    expect(s.longitude).toBeLessThan(Math.PI);
    expect(s.latitude).toBeCloseTo(Math.PI / 2, 12);
    for (let i = 0; i < 100; i++) s.zoom(0.5);
    expect(s.fov).toBeGreaterThan(0.19);
    for (let i = 0; i < 100; i++) s.zoom(2.0);
    expect(s.fov).toBeLessThan(2.81);
  });
});

describe("bitmap decoding", () => {
  it("unpacks MSB-first packed bits", () => {
    // 0b10100000 0b01000000 -> blocks 0, 2, 9 decoded
    const b64 = Buffer.from([0b10100000, 0b01000000]).toString("base64");
    const bits = decodeBitmap(b64, 12);
    expect([...bits]).toEqual([1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0]);
  });
});

describe("chart and minimap geometry", () => {
  it("step polyline is monotone in x and hits the final level", () => {
    const pts = stepPolyline([10, 20, 40], 300, 100, 40);
    for (let i = 1; i < pts.length; i++) {
      expect(pts[i].x).toBeGreaterThanOrEqual(pts[i - 1].x);
    }
    expect(pts[pts.length - 1].y).toBeCloseTo(0, 12); // 40/40 -> top
    expect(pts[0].y).toBe(100); // starts at the floor
  });

  it("empty series yields no points", () => {
    expect(stepPolyline([], 100, 100, 1)).toEqual([]);
  });

  it("block cells tile the minimap exactly", () => {
    const cell0 = blockCell(0, 8, 16, 416, 208);
    expect(cell0).toEqual({ x: 0, y: 0, w: 26, h: 26 });
    const last = blockCell(127, 8, 16, 416, 208);
    expect(last.x + last.w).toBeCloseTo(416, 9);
    expect(last.y + last.h).toBeCloseTo(208, 9);
  });
});
