// Browser entry point: canvas panorama viewer talking to the session
// service over WebSocket.

import { ViewerController } from "./controller.js";
import { drawMinimap } from "./minimap.js";
import { drawOverlay } from "./overlay.js";
import { WsTransport } from "./transport.js";
import type { OverlayResponse, SessionResponse } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const viewport = el<HTMLCanvasElement>("viewport");
const minimap = el<HTMLCanvasElement>("minimap");
const chart = el<HTMLCanvasElement>("chart");
const hudBox = el<HTMLDivElement>("hud");
const statusBox = el<HTMLSpanElement>("status");
const baselineSel = el<HTMLSelectElement>("baseline");

const sessionId = `web-${Math.random().toString(36).slice(2, 10)}`;
const wsUrl = `ws://${location.host || "127.0.0.1:8360"}/`;
const transport = new WsTransport(wsUrl);
const controller = new ViewerController(sessionId, transport,
                                        [viewport.width, viewport.height]);

controller.onResponse = (resp: SessionResponse) => {
  const img = new Image();
  img.onload = () => {
    viewport.getContext("2d")!.drawImage(img, 0, 0);
  };
  img.src = `data:image/png;base64,${resp.viewport_png_b64}`;
  const hud = controller.state.hud();
  hudBox.innerHTML = Object.entries(hud)
    .map(([k, v]) => `<div><span>${k}</span><b>${v}</b></div>`)
    .join("");
  drawMinimap(minimap.getContext("2d")!, minimap.width, minimap.height,
              resp.grid.rows, resp.grid.cols, controller.state.decodedBlocks,
              resp.access_blocks);
  transport.send({ type: "overlay", session_id: sessionId,
                   baseline: baselineSel.value });
};

transport.onMessage = (msg) => {
  if (msg.type === "overlay") {
    const o = msg as OverlayResponse;
    drawOverlay(chart.getContext("2d")!, chart.width, chart.height,
                o.ours, o.baseline, o.baseline_tag);
    return;
  }
  controller.handleMessage(msg, performance.now());
};
transport.onStatus = (connected) => {
  controller.state.connected = connected;
  statusBox.textContent = connected ? "connected" : "reconnecting…";
  if (connected) controller.poke(performance.now());
};

let dragging = false;
viewport.addEventListener("pointerdown", (ev) => {
  dragging = true;
  viewport.setPointerCapture(ev.pointerId);
});
viewport.addEventListener("pointerup", () => (dragging = false));
viewport.addEventListener("pointermove", (ev) => {
  if (!dragging) return;
  const s = controller.state;
  s.pan(-ev.movementX * (s.fov / viewport.width),
        ev.movementY * (s.fov / viewport.height));
  controller.poke(performance.now());
});
viewport.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  controller.state.zoom(ev.deltaY > 0 ? 1.1 : 0.9);
  controller.poke(performance.now());
});

setInterval(() => controller.tick(performance.now()), 50);
transport.connect();
