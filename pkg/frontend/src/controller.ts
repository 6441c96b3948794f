// Navigation controller: turns input events into paced service requests,
// one in flight at a time, newest gaze winning while busy.

import { Gaze, MIN_REQUEST_INTERVAL_MS, PendingGaze, RateLimiter } from "./cadence.js";
import { ViewerState } from "./state.js";
import type { ServiceMessage, SessionRequest, SessionResponse } from "./types.js";

export interface Transport {
  send(msg: SessionRequest | Record<string, unknown>): void;
}

export class ViewerController {
  readonly state: ViewerState;
  private readonly limiter: RateLimiter;
  private readonly pending = new PendingGaze();
  private inFlight = false;
  readonly requestLog: SessionRequest[] = [];
  onResponse: ((resp: SessionResponse) => void) | null = null;
  onError: ((message: string) => void) | null = null;

  constructor(
    readonly sessionId: string,
    private readonly transport: Transport,
    vpDims: [number, number] = [256, 256],
    intervalMs: number = MIN_REQUEST_INTERVAL_MS,
  ) {
    this.state = new ViewerState(vpDims);
    this.limiter = new RateLimiter(intervalMs);
  }

  /** Input event (drag delta applied beforehand); nowMs from the caller's
   * clock so tests can drive synthetic streams. */
  poke(nowMs: number): void {
    const gaze: Gaze = {
      longitude: this.state.longitude,
      latitude: this.state.latitude,
      fov: this.state.fov,
    };
    if (this.inFlight || !this.limiter.allow(nowMs)) {
      this.pending.push(gaze);
      return;
    }
    this.request(gaze);
  }

  private request(g: Gaze): void {
    const msg: SessionRequest = {
      type: "request",
      session_id: this.sessionId,
      longitude: g.longitude,
      latitude: g.latitude,
      fov: g.fov,
      vp_dims: this.state.vpDims,
    };
    this.inFlight = true;
    this.requestLog.push(msg);
    this.transport.send(msg);
  }

  /** Feed every service message here (transport-agnostic). */
  handleMessage(msg: ServiceMessage, nowMs: number): void {
    if (msg.type === "error") {
      this.inFlight = false;
      this.onError?.(msg.message);
      return;
    }
    if (msg.type !== "response") {
      return;
    }
    this.inFlight = false;
    this.state.applyResponse(msg);
    this.onResponse?.(msg);
    const queued = this.pending.take();
    if (queued !== null && this.limiter.allow(nowMs)) {
      this.request(queued);
    } else if (queued !== null) {
      this.pending.push(queued);
    }
  }

  /** Retry a queued gaze once the pacing window reopens. */
  tick(nowMs: number): void {
    if (this.inFlight || !this.pending.hasPending) {
      return;
    }
    if (this.limiter.allow(nowMs)) {
      const queued = this.pending.take();
      if (queued !== null) {
        this.request(queued);
      }
    }
  }
}
