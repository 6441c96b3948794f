// Request pacing: the service is asked at most once per interval regardless
// of how fast input events arrive, and only one request is in flight; while
// waiting, the newest desired gaze wins.

export const MIN_REQUEST_INTERVAL_MS = 200; // mirrors 200 ms trace sampling

export class RateLimiter {
  private last = Number.NEGATIVE_INFINITY;

  constructor(private readonly intervalMs: number = MIN_REQUEST_INTERVAL_MS) {}

  allow(nowMs: number): boolean {
    if (nowMs - this.last >= this.intervalMs) {
      this.last = nowMs;
      return true;
    }
    return false;
  }
}

export interface Gaze {
  longitude: number;
  latitude: number;
  fov: number;
}

/** Latest-wins holder for the next gaze to request. */
export class PendingGaze {
  private pending: Gaze | null = null;

  push(g: Gaze): void {
    this.pending = g;
  }

  take(): Gaze | null {
    const out = this.pending;
    this.pending = null;
    return out;
  }

  get hasPending(): boolean {
    return this.pending !== null;
  }
}
