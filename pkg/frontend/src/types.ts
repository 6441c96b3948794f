// Wire types of the session service (length-prefixed JSON / WebSocket).

export interface SessionRequest {
  type: "request";
  session_id: string;
  longitude: number;
  latitude: number;
  fov: number;
  vp_dims: [number, number];
}

export interface BlockRecord {
  block_id: number;
  context_id: number;
  bits: number;
}

export interface Metrics {
  request_bits: number;
  accumulated_bits: number;
  usefulness: number;
  psnr_db: number | null;
}

export interface SessionResponse {
  type: "response";
  session_id: string;
  blocks: BlockRecord[];
  viewport_png_b64: string;
  metrics: Metrics;
  grid: { rows: number; cols: number };
  decoded_bitmap_b64: string;
  access_blocks: number[];
}

export interface OverlayResponse {
  type: "overlay";
  session_id: string;
  ours: number[];
  baseline: number[];
  baseline_tag: string;
}

export interface ErrorResponse {
  type: "error";
  session_id?: string;
  message: string;
}

export type ServiceMessage = SessionResponse | OverlayResponse | ErrorResponse;
