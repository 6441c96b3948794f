// Client-side session state. Every displayed number is carried verbatim from
// the last service response; the viewer never recomputes rates or quality.

import type { Metrics, SessionResponse } from "./types.js";

export function wrapLongitude(lon: number): number {
  const twoPi = 2 * Math.PI;
  return ((((lon + Math.PI) % twoPi) + twoPi) % twoPi) - Math.PI;
}

export function clampLatitude(lat: number): number {
  return Math.min(Math.max(lat, -Math.PI / 2), Math.PI / 2);
}

const B64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

function base64Bytes(b64: string): Uint8Array {
  const clean = b64.replace(/=+$/, "");
  const out = new Uint8Array(Math.floor((clean.length * 3) / 4));
  let acc = 0;
  let bits = 0;
  let k = 0;
  for (const ch of clean) {
    acc = (acc << 6) | B64.indexOf(ch);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out[k++] = (acc >> bits) & 0xff;
    }
  }
  return out;
}

export function decodeBitmap(b64: string, nBlocks: number): Uint8Array {
  const bytes = base64Bytes(b64);
  const out = new Uint8Array(nBlocks);
  for (let i = 0; i < nBlocks; i++) {
    out[i] = (bytes[i >> 3] >> (7 - (i & 7))) & 1;
  }
  return out;
}

export class ViewerState {
  longitude = 0;
  latitude = 0;
  fov = Math.PI / 2;
  readonly vpDims: [number, number];
  connected = false;
  lastMetrics: Metrics | null = null;
  metricsHistory: Metrics[] = [];
  decodedBlocks: Uint8Array = new Uint8Array(0);
  accessBlocks: number[] = [];
  grid = { rows: 0, cols: 0 };

  constructor(vpDims: [number, number] = [256, 256]) {
    this.vpDims = vpDims;
  }

  pan(dLon: number, dLat: number): void {
    this.longitude = wrapLongitude(this.longitude + dLon);
    this.latitude = clampLatitude(this.latitude + dLat);
  }

  zoom(factor: number): void {
    this.fov = Math.min(Math.max(this.fov * factor, 0.2), 2.8);
  }

  applyResponse(resp: SessionResponse): void {
    this.grid = resp.grid;
    this.lastMetrics = resp.metrics;
    this.metricsHistory.push(resp.metrics);
    this.decodedBlocks = decodeBitmap(
      resp.decoded_bitmap_b64, resp.grid.rows * resp.grid.cols);
    this.accessBlocks = resp.access_blocks;
  }

  /** HUD lines; values are the service's own, rendered verbatim. */
  hud(): Record<string, string> {
    const m = this.lastMetrics;
    if (!m) {
      return { "request bits": "-", "accumulated bits": "-",
               usefulness: "-", "viewport PSNR": "-" };
    }
    return {
      "request bits": String(m.request_bits),
      "accumulated bits": String(m.accumulated_bits),
      usefulness: String(m.usefulness),
      "viewport PSNR": m.psnr_db === null ? "n/a" : String(m.psnr_db),
    };
  }
}
