// WebSocket transport to the session service with automatic reconnection
// under the same session id (the server keeps the session alive).

import type { ServiceMessage } from "./types.js";

export class WsTransport {
  private ws: WebSocket | null = null;
  private closed = false;
  onMessage: ((msg: ServiceMessage) => void) | null = null;
  onStatus: ((connected: boolean) => void) | null = null;

  constructor(private readonly url: string,
              private readonly reconnectDelayMs = 1000) {}

  connect(): void {
    this.closed = false;
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => this.onStatus?.(true);
    this.ws.onmessage = (ev) => {
      try {
        this.onMessage?.(JSON.parse(String(ev.data)) as ServiceMessage);
      } catch {
        // ignore malformed frames
      }
    };
    this.ws.onclose = () => {
      this.onStatus?.(false);
      if (!this.closed) {
        setTimeout(() => this.connect(), this.reconnectDelayMs);
      }
    };
  }

  send(msg: Record<string, unknown>): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(msg));
    }
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
