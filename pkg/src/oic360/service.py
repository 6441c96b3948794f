"""Interactive decode sessions, the trace simulator, and the session service.

One code path serves both the offline simulator and the network service: a
DecodeSession plans the block order for each viewport request, extracts the
matching bitstream prefixes, decodes, and accounts bits exactly as stored in
the container.  Baseline sessions (tiles, exhaustive storage) replay the same
requests against the baseline's accounting while sharing the block
reconstructions, so distortion is matched by construction.

The network protocol is length-prefixed JSON over TCP; the same JSON messages
are also served over a minimal in-process WebSocket upgrade so browsers can
connect directly.
"""

from __future__ import annotations

import base64
import hashlib
import io
import json
import math
import socket
import socketserver
import struct
import threading
from dataclasses import dataclass, field

import numpy as np

from . import baselines as bl
from . import codec_core
from .blocks import EMPTY, available_contexts
from .encoder import EncodedImage, si_planes_for
from .geom import (
    Direction,
    PlaneImage,
    ViewportSpec,
    footprint_pixels,
    render_viewport,
    usefulness,
    viewport_footprint,
    viewport_psnr,
)
from .incremental import decode_block, extract
from .ordering import ORDER_SNAKE, SessionState, plan_navigation


@dataclass
class RequestResult:
    blocks: list                 # (block_id, context_id, bits)
    request_bits: int
    accumulated_bits: int
    usefulness: float
    psnr_db: float
    viewport: np.ndarray | None


class DecodeSession:
    """One user's stateful navigation against an encoded image."""

    def __init__(self, enc: EncodedImage, original: PlaneImage | None = None,
                 order_algorithm: str = ORDER_SNAKE):
        self.enc = enc
        self.original = original
        self.order_algorithm = order_algorithm
        self.state = SessionState()
        self.canvas = np.zeros((enc.height, enc.width), dtype=np.uint8)
        self.code = enc.code

    def _rate_of(self, block: int, ctx: int) -> int:
        return self.enc.transmit_bits(block, ctx)

    def _decode_one(self, block: int, ctx: int):
        enc = self.enc
        ext = extract(enc.streams[block], ctx)
        if ctx == EMPTY:
            si = None
        else:
            si = si_planes_for(self.canvas, enc.grid, block, ctx,
                               enc.modes[(block, ctx)], enc.qp, enc.n_planes)
        planes = decode_block(ext, si, self.code)
        levels = codec_core.bitplane_join(
            codec_core.BitplaneSet(planes),
            (enc.block_size, enc.block_size))
        enc.grid.set_block(self.canvas, block,
                           codec_core.reconstruct(levels, enc.qp))

    def request(self, spec: ViewportSpec) -> RequestResult:
        enc = self.enc
        footprint = viewport_footprint(spec, enc.width, enc.height,
                                       enc.block_size)
        starts, order = plan_navigation(
            self.state, footprint, enc.access, enc.grid,
            algorithm=self.order_algorithm, rate_of=self._rate_of,
            prefer_horizontal=enc.prefer_horizontal)
        records = []
        bits_total = order.signaling_bits
        for block in order.blocks:
            ctx = available_contexts(enc.grid, block, self.state.decoded)
            bits = enc.transmit_bits(block, ctx)
            self._decode_one(block, ctx)
            self.state.decoded.add(block)
            records.append((block, ctx, bits))
            bits_total += bits
        self.state.accumulated_bits += bits_total
        self.state.requests += 1

        py, _ = footprint_pixels(spec, enc.width, enc.height)
        displayed = int(py.size)
        decoded_px = len(self.state.decoded) * enc.n
        use = usefulness(displayed, decoded_px)
        vp = render_viewport(PlaneImage(self.canvas), spec)
        psnr = math.nan
        if self.original is not None:
            psnr = viewport_psnr(render_viewport(self.original, spec), vp)
        return RequestResult(records, bits_total, self.state.accumulated_bits,
                             use, psnr, vp)


class ESSession(DecodeSession):
    """Exhaustive storage transmits at the identical conditional rates."""


class TileSession:
    """Tile baseline: whole tiles are sent, nothing is resent."""

    def __init__(self, enc: EncodedImage, encoding: bl.TileEncoding,
                 original: PlaneImage | None = None):
        self.enc = enc
        self.encoding = encoding
        self.original = original
        self.sent_tiles: set = set()
        self.decoded: set = set()
        self.accumulated_bits = 0
        ensure_recon(enc)
        self.canvas = np.zeros((enc.height, enc.width), dtype=np.uint8)

    def request(self, spec: ViewportSpec) -> RequestResult:
        enc = self.enc
        footprint = viewport_footprint(spec, enc.width, enc.height,
                                       enc.block_size)
        tiles = self.encoding.request_tiles(enc.grid, footprint)
        records = []
        bits_total = 0
        for t in tiles:
            if t in self.sent_tiles:
                continue
            self.sent_tiles.add(t)
            bits_total += self.encoding.tile_bits[t]
            for b in self.encoding.layout.tiles[t].blocks(enc.grid):
                self.decoded.add(b)
                records.append((b, self.encoding.assignment[b],
                                self.encoding.block_bits[b]))
                enc.grid.set_block(self.canvas, b,
                                   enc.grid.get_block(enc.recon, b))
        self.accumulated_bits += bits_total

        py, _ = footprint_pixels(spec, enc.width, enc.height)
        use = usefulness(int(py.size), len(self.decoded) * enc.n)
        vp = render_viewport(PlaneImage(self.canvas), spec)
        psnr = math.nan
        if self.original is not None:
            psnr = viewport_psnr(render_viewport(self.original, spec), vp)
        return RequestResult(records, bits_total, self.accumulated_bits,
                             use, psnr, vp)


def ensure_recon(enc: EncodedImage):
    """Decode every block once so parsed containers expose reconstructions."""
    if enc.recon is not None:
        return enc
    session = DecodeSession(enc)
    all_blocks = set(range(enc.grid.n_blocks))
    _, order = plan_navigation(session.state, all_blocks, enc.access,
                               enc.grid, prefer_horizontal=enc.prefer_horizontal)
    for block in order.blocks:
        ctx = available_contexts(enc.grid, block, session.state.decoded)
        session._decode_one(block, ctx)
        session.state.decoded.add(block)
    enc.recon = session.canvas
    return enc


def make_session(enc: EncodedImage, baseline: str = "ours",
                 original: PlaneImage | None = None,
                 order_algorithm: str = ORDER_SNAKE):
    if baseline == "ours":
        return DecodeSession(enc, original, order_algorithm)
    if baseline == "es":
        return ESSession(enc, original, order_algorithm)
    layout = bl.layout_from_tag(enc.grid, baseline)
    return TileSession(enc, bl.tile_encode(enc, layout), original)


def simulate(enc: EncodedImage, trace, fov: float = math.pi / 2,
             vp_dims=(256, 256), baseline: str = "ours",
             order_algorithm: str = ORDER_SNAKE,
             original: PlaneImage | None = None):
    """Replay a head trace; yields one log row per (user, request)."""
    rows = []
    for user, samples in trace.users.items():
        session = make_session(enc, baseline, original, order_algorithm)
        for req_idx, (_t_ms, direction) in enumerate(samples):
            spec = ViewportSpec(direction, fov, fov, vp_dims[0], vp_dims[1])
            res = session.request(spec)
            rows.append({
                "user": user,
                "request_idx": req_idx,
                "bits": res.request_bits,
                "accum_bits": res.accumulated_bits,
                "usefulness": res.usefulness,
                "psnr_db": res.psnr_db,
            })
    return rows


LOG_FIELDS = ("user", "request_idx", "bits", "accum_bits", "usefulness",
              "psnr_db")


def write_log(path, rows):
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=LOG_FIELDS)
        writer.writeheader()
        for row in rows:
            out = dict(row)
            out["usefulness"] = f"{row['usefulness']:.9f}"
            out["psnr_db"] = f"{row['psnr_db']:.6f}"
            writer.writerow(out)


def read_log(path):
    import csv

    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append({
                "user": row["user"],
                "request_idx": int(row["request_idx"]),
                "bits": int(row["bits"]),
                "accum_bits": int(row["accum_bits"]),
                "usefulness": float(row["usefulness"]),
                "psnr_db": float(row["psnr_db"]),
            })
    return rows


# Session service ---------------------------------------------------------

class OicService:
    """Transport-independent request handler; one session per session id."""

    def __init__(self, enc: EncodedImage, original: PlaneImage | None = None,
                 order_algorithm: str = ORDER_SNAKE):
        self.enc = enc
        self.original = original
        self.order_algorithm = order_algorithm
        self.sessions: dict = {}
        self.history: dict = {}
        self._lock = threading.Lock()

    def _session(self, sid: str) -> DecodeSession:
        with self._lock:
            if sid not in self.sessions:
                self.sessions[sid] = DecodeSession(
                    self.enc, self.original, self.order_algorithm)
                self.history[sid] = []
            return self.sessions[sid]

    def handle_message(self, msg: dict) -> dict:
        try:
            mtype = msg.get("type", "request")
            sid = str(msg.get("session_id", ""))
            if not sid:
                return {"type": "error", "message": "missing session_id"}
            if mtype == "request":
                return self._handle_request(sid, msg)
            if mtype == "overlay":
                return self._handle_overlay(sid, msg)
            return {"type": "error", "session_id": sid,
                    "message": f"unknown message type {mtype!r}"}
        except Exception as exc:  # session survives bad requests
            return {"type": "error", "session_id": msg.get("session_id"),
                    "message": str(exc)}

    def _spec_from(self, msg: dict) -> ViewportSpec:
        fov = float(msg.get("fov", math.pi / 2))
        dims = msg.get("vp_dims", [256, 256])
        return ViewportSpec(
            Direction(float(msg["longitude"]), float(msg["latitude"])),
            fov, fov, int(dims[0]), int(dims[1]))

    def _handle_request(self, sid: str, msg: dict) -> dict:
        session = self._session(sid)
        spec = self._spec_from(msg)
        res = session.request(spec)
        self.history[sid].append(
            (spec.direction.longitude, spec.direction.latitude,
             spec.fov_h, spec.vp_width, spec.vp_height))
        from PIL import Image

        buf = io.BytesIO()
        Image.fromarray(res.viewport, mode="L").save(buf, format="PNG")
        bitmap = np.zeros(self.enc.grid.n_blocks, dtype=np.uint8)
        if session.state.decoded:
            bitmap[sorted(session.state.decoded)] = 1
        return {
            "type": "response",
            "session_id": sid,
            "blocks": [{"block_id": b, "context_id": c, "bits": bits}
                       for b, c, bits in res.blocks],
            "viewport_png_b64": base64.b64encode(buf.getvalue()).decode(),
            "metrics": {
                "request_bits": res.request_bits,
                "accumulated_bits": res.accumulated_bits,
                "usefulness": res.usefulness,
                "psnr_db": None if math.isnan(res.psnr_db) else res.psnr_db,
            },
            "grid": {"rows": self.enc.grid.rows, "cols": self.enc.grid.cols},
            "decoded_bitmap_b64": base64.b64encode(
                np.packbits(bitmap).tobytes()).decode(),
            "access_blocks": list(self.enc.access.blocks),
        }

    def _handle_overlay(self, sid: str, msg: dict) -> dict:
        baseline = msg.get("baseline", "t2x2")
        history = self.history.get(sid, [])
        if not history:
            return {"type": "overlay", "session_id": sid, "ours": [],
                    "baseline": [], "baseline_tag": baseline}
        ours_session = make_session(self.enc, "ours",
                                    order_algorithm=self.order_algorithm)
        base_session = make_session(self.enc, baseline)
        ours, base = [], []
        for lon, lat, fov, w, h in history:
            spec = ViewportSpec(Direction(lon, lat), fov, fov, w, h)
            ours.append(ours_session.request(spec).accumulated_bits)
            base.append(base_session.request(spec).accumulated_bits)
        return {"type": "overlay", "session_id": sid, "ours": ours,
                "baseline": base, "baseline_tag": baseline}


# Wire transport ------------------------------------------------------------

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


def _ws_accept_key(key: str) -> str:
    digest = hashlib.sha1((key + _WS_GUID).encode()).digest()
    return base64.b64encode(digest).decode()


def _ws_read_frame(rfile):
    head = rfile.read(2)
    if len(head) < 2:
        return None, None
    opcode = head[0] & 0x0F
    masked = head[1] & 0x80
    length = head[1] & 0x7F
    if length == 126:
        length = struct.unpack(">H", rfile.read(2))[0]
    elif length == 127:
        length = struct.unpack(">Q", rfile.read(8))[0]
    mask = rfile.read(4) if masked else b"\x00" * 4
    payload = bytearray(rfile.read(length))
    if masked:
        for i in range(len(payload)):
            payload[i] ^= mask[i % 4]
    return opcode, bytes(payload)


def _ws_send_frame(wfile, payload: bytes, opcode: int = 1):
    header = bytearray([0x80 | opcode])
    n = len(payload)
    if n < 126:
        header.append(n)
    elif n < 1 << 16:
        header.append(126)
        header.extend(struct.pack(">H", n))
    else:
        header.append(127)
        header.extend(struct.pack(">Q", n))
    wfile.write(bytes(header) + payload)
    wfile.flush()


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        first = self.rfile.peek(1)[:1] if hasattr(self.rfile, "peek") else b""
        if first == b"G":
            self._handle_websocket()
        else:
            self._handle_framed()

    def _handle_framed(self):
        while True:
            head = self.rfile.read(4)
            if len(head) < 4:
                return
            (length,) = struct.unpack(">I", head)
            body = self.rfile.read(length)
            if len(body) < length:
                return
            reply = self.server.service.handle_message(json.loads(body))
            out = json.dumps(reply).encode()
            self.wfile.write(struct.pack(">I", len(out)) + out)
            self.wfile.flush()

    def _handle_websocket(self):
        request_line = self.rfile.readline().decode("latin-1")
        headers = {}
        while True:
            line = self.rfile.readline().decode("latin-1").strip()
            if not line:
                break
            k, _, v = line.partition(":")
            headers[k.strip().lower()] = v.strip()
        key = headers.get("sec-websocket-key")
        if not key or "websocket" not in headers.get("upgrade", "").lower():
            self.wfile.write(b"HTTP/1.1 400 Bad Request\r\n\r\n")
            return
        accept = _ws_accept_key(key)
        self.wfile.write(
            b"HTTP/1.1 101 Switching Protocols\r\n"
            b"Upgrade: websocket\r\nConnection: Upgrade\r\n"
            + f"Sec-WebSocket-Accept: {accept}\r\n\r\n".encode())
        self.wfile.flush()
        while True:
            opcode, payload = _ws_read_frame(self.rfile)
            if opcode is None or opcode == 8:
                return
            if opcode == 9:  # ping
                _ws_send_frame(self.wfile, payload, opcode=10)
                continue
            if opcode not in (1, 2):
                continue
            reply = self.server.service.handle_message(json.loads(payload))
            _ws_send_frame(self.wfile, json.dumps(reply).encode())


class SessionServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, bind, service: OicService):
        super().__init__(bind, _Handler)
        self.service = service


def serve(enc: EncodedImage, bind=("127.0.0.1", 8360),
          original: PlaneImage | None = None,
          order_algorithm: str = ORDER_SNAKE) -> SessionServer:
    """Create (but do not start) the session server; callers run
    serve_forever() or use it in a thread."""
    return SessionServer(bind, OicService(enc, original, order_algorithm))


def send_framed(sock: socket.socket, msg: dict) -> dict:
    """Client helper for the length-prefixed JSON transport."""
    out = json.dumps(msg).encode()
    sock.sendall(struct.pack(">I", len(out)) + out)
    head = b""
    while len(head) < 4:
        chunk = sock.recv(4 - len(head))
        if not chunk:
            raise ConnectionError("server closed")
        head += chunk
    (length,) = struct.unpack(">I", head)
    body = b""
    while len(body) < length:
        chunk = sock.recv(length - len(body))
        if not chunk:
            raise ConnectionError("server closed")
        body += chunk
    return json.loads(body)
