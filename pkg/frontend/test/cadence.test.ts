import { describe, expect, it } from "vitest";

import { MIN_REQUEST_INTERVAL_MS, PendingGaze, RateLimiter } from "../src/cadence.js";
import { ViewerController } from "../src/controller.js";
import type { SessionRequest, SessionResponse } from "../src/types.js";

function fakeResponse(sid: string): SessionResponse {
  return {
    type: "response",
    session_id: sid,
    blocks: [],
    viewport_png_b64: "",
    metrics: { request_bits: 0, accumulated_bits: 0, usefulness: 1,
               psnr_db: null },
    grid: { rows: 2, cols: 4 },
    decoded_bitmap_b64: "AA==",
    access_blocks: [],
  };
}

describe("rate limiting", () => {
  it("allows at most one request per interval", () => {
    const limiter = new RateLimiter(200);
    let allowed = 0;
    for (let t = 0; t < 1000; t += 1000 / 60) {
      if (limiter.allow(t)) allowed++;
    }
    expect(allowed).toBeLessThanOrEqual(5);
    expect(allowed).toBeGreaterThan(0);
  });

  it("keeps only the newest pending gaze", () => {
    const q = new PendingGaze();
    q.push({ longitude: 1, latitude: 0, fov: 1 });
    q.push({ longitude: 2, latitude: 0, fov: 1 });
    expect(q.take()?.longitude).toBe(2);
    expect(q.take()).toBeNull();
  });
});

describe("controller cadence under a 60 Hz drag stream", () => {
  it("sends at most 5 requests per second", () => {
    const sent: SessionRequest[] = [];
    const controller = new ViewerController("s", {
      send: (m) => sent.push(m as SessionRequest),
    });
    // 60 Hz pointer events for one second; the service answers instantly
    for (let i = 0; i < 60; i++) {
      const now = (i * 1000) / 60;
      controller.state.pan(0.01, 0);
      controller.poke(now);
      // instant response for whatever is in flight
      controller.handleMessage(fakeResponse("s"), now);
    }
    expect(sent.length).toBeLessThanOrEqual(5);
    expect(sent.length).toBeGreaterThan(0);
  });

  it("holds a single in-flight request with latest-wins", () => {
    const sent: SessionRequest[] = [];
    const controller = new ViewerController("s", {
      send: (m) => sent.push(m as SessionRequest),
    });
    controller.poke(0);
    expect(sent.length).toBe(1);
    // no response yet: further pokes queue instead of sending
    controller.state.pan(0.5, 0);
    controller.poke(300);
    controller.state.pan(0.5, 0);
    controller.poke(600);
    expect(sent.length).toBe(1);
    controller.handleMessage(fakeResponse("s"), 650);
    expect(sent.length).toBe(2);
    // the queued request carries the newest gaze
    expect(sent[1].longitude).toBeCloseTo(sent[0].longitude + 1.0, 12);
  });

  it("default pacing mirrors the 200 ms trace sampling", () => {
    expect(MIN_REQUEST_INTERVAL_MS).toBe(200);
  });
});
