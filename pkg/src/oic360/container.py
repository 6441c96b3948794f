"""Bitstream container (.oic) and head-trace ingestion.

Layout: fixed header, access-block serialization, packed 4-bit intra-mode
table, then per block and per plane a chunk directory followed by the
payload bits.  Directories precede payloads so extraction is a seek at the
directory-declared prefix length.  Multi-byte integers are little-endian;
bit vectors are MSB-first and padded to byte boundaries, with padding
excluded from all rate accounting.

Storage accounting: the stored cost S counts the syndrome payload at its
charged rates, the access completions, and every header/directory/checksum
bit.  The physical access bitmap of the fixed placement strategy is excluded
(the decoder could rebuild the set from the placement parameters alone), and
the content strategy is charged the address-list formula instead of its wire
encoding.  In theoretical mode the payload carries the planes losslessly
while S still charges the information-theoretic rates; the transport excess
is reported separately.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .blocks import BlockGrid, context_set_for
from .encoder import EncodedImage
from .geom import Direction, ViewportSpec
from .incremental import (
    CHECKSUM_BITS,
    MODE_ID_BITS,
    MODE_PRACTICAL,
    MODE_THEORETICAL,
    IncrementalBitstream,
    PlaneCode,
)
from .kernels import BP_MAX_ITERS, BP_PATIENCE
from .placement import STRATEGY_CONTENT, STRATEGY_FIXED, AccessBlockSet

MAGIC = b"OIC1"
VERSION = 1


class ContainerError(ValueError):
    pass


class BitWriter:
    def __init__(self):
        self.data = bytearray()
        self._acc = 0
        self._nacc = 0
        self.padding_bits = 0

    @property
    def bit_length(self) -> int:
        return 8 * len(self.data) + self._nacc

    def write_uint(self, value: int, bits: int):
        if value < 0 or value >= (1 << bits):
            raise ValueError(f"{value} does not fit in {bits} bits")
        for shift in range(bits - 1, -1, -1):
            self._acc = (self._acc << 1) | ((value >> shift) & 1)
            self._nacc += 1
            if self._nacc == 8:
                self.data.append(self._acc)
                self._acc = 0
                self._nacc = 0

    def write_bits(self, bits: np.ndarray):
        # fast path: byte-aligned bulk write
        if self._nacc == 0:
            packed = np.packbits(bits.astype(np.uint8))
            self.data.extend(packed.tobytes())
            extra = len(bits) % 8
            if extra:
                # roll back the zero-padded tail byte and re-enter bit mode
                last = self.data.pop()
                self._acc = last >> (8 - extra)
                self._nacc = extra
        else:
            for b in bits:
                self.write_uint(int(b), 1)

    def align(self):
        if self._nacc:
            pad = 8 - self._nacc
            self.padding_bits += pad
            self.write_uint(0, pad)

    def write_struct(self, fmt: str, *values):
        self.align()
        self.data.extend(struct.pack(fmt, *values))

    def getvalue(self) -> bytes:
        self.align()
        return bytes(self.data)


class BitReader:
    def __init__(self, data: bytes):
        self.data = data
        self.bitpos = 0

    def read_uint(self, bits: int) -> int:
        out = 0
        for _ in range(bits):
            byte = self.data[self.bitpos >> 3]
            out = (out << 1) | ((byte >> (7 - (self.bitpos & 7))) & 1)
            self.bitpos += 1
        return out

    def read_bits(self, n: int) -> np.ndarray:
        if self.bitpos % 8 == 0 and n >= 8:
            nbytes = (n + 7) // 8
            start = self.bitpos >> 3
            arr = np.frombuffer(self.data[start:start + nbytes], dtype=np.uint8)
            bits = np.unpackbits(arr)[:n].copy()
            self.bitpos += n
            return bits
        return np.array([self.read_uint(1) for _ in range(n)], dtype=np.uint8)

    def align(self):
        self.bitpos = (self.bitpos + 7) & ~7

    def read_struct(self, fmt: str):
        self.align()
        size = struct.calcsize(fmt)
        start = self.bitpos >> 3
        if start + size > len(self.data):
            raise ContainerError("truncated container")
        out = struct.unpack_from(fmt, self.data, start)
        self.bitpos += 8 * size
        return out


def _mode_table_entries(grid: BlockGrid, access: AccessBlockSet):
    for idx in range(grid.n_blocks):
        for ctx in context_set_for(grid, idx, is_access=False):
            yield idx, ctx


@dataclass
class StorageReport:
    """Bit-exact decomposition of the stored cost S."""

    fixed_header_bits: int
    access_wire_bits: int
    access_signaling_bits: int
    mode_table_bits: int
    directory_bits: int
    checksum_bits: int
    payload_bits: int
    completion_bits: int
    padding_bits: int
    transport_excess_bits: int
    file_bits: int

    @property
    def header_bits(self) -> int:
        """Everything S charges besides payload and completion."""
        return (self.fixed_header_bits + self.access_signaling_bits
                + self.mode_table_bits + self.directory_bits
                + self.checksum_bits)

    @property
    def total_bits(self) -> int:
        return self.header_bits + self.payload_bits + self.completion_bits

    @property
    def total_bytes(self) -> float:
        return self.total_bits / 8.0


def _directory_bits_for(bs: IncrementalBitstream, mode: str) -> int:
    per_chunk = 8 + 16 + (8 if mode == MODE_PRACTICAL else 0)
    bits = 0
    for pc in bs.planes:
        bits += 8 + len(pc.order) * per_chunk + 16  # L, chunks, completion
    return bits


def storage_report(enc: EncodedImage, file_bits: int = 0,
                   padding_bits: int = 0) -> StorageReport:
    grid = enc.grid
    n = enc.n
    fixed_header = 8 * struct.calcsize("<4sBBBHHHBBIHH") \
        + 8 * struct.calcsize("<ddHHdd") + 8 * struct.calcsize("<B") \
        + 64  # trailing accounted-S field
    if enc.access.strategy == STRATEGY_FIXED:
        access_wire = 8 * ((grid.n_blocks + 7) // 8)
    else:
        access_wire = 16 + 16 * len(enc.access.blocks)
    mode_entries = sum(1 for _ in _mode_table_entries(grid, enc.access))
    mode_table = MODE_ID_BITS * mode_entries
    directory = sum(_directory_bits_for(bs, enc.mode) for bs in enc.streams)
    checksum = CHECKSUM_BITS * enc.n_planes * grid.n_blocks
    payload = enc.stored_payload_bits()
    completion = enc.completion_bits()
    transport_excess = 0
    if enc.mode == MODE_THEORETICAL:
        transport_excess = n * enc.n_planes * grid.n_blocks \
            - payload - completion
    return StorageReport(
        fixed_header_bits=fixed_header,
        access_wire_bits=access_wire,
        access_signaling_bits=enc.access.signaling_bits,
        mode_table_bits=mode_table,
        directory_bits=directory,
        checksum_bits=checksum,
        payload_bits=payload,
        completion_bits=completion,
        padding_bits=padding_bits,
        transport_excess_bits=transport_excess,
        file_bits=file_bits,
    )


def serialize(enc: EncodedImage) -> bytes:
    grid = enc.grid
    w = BitWriter()
    report = storage_report(enc)
    spec = enc.placement_spec
    w.write_struct("<4sBBBHHHBBIHH", MAGIC, VERSION,
                   0 if enc.mode == MODE_THEORETICAL else 1,
                   1 if enc.prefer_horizontal else 0,
                   enc.width, enc.height, enc.block_size, enc.qp,
                   enc.n_planes, enc.seed, BP_MAX_ITERS, BP_PATIENCE)
    w.write_struct("<ddHHdd", spec.fov_h, spec.fov_v, spec.vp_width,
                   spec.vp_height, 0.0, 0.0)
    w.write_struct("<B", 0 if enc.access.strategy == STRATEGY_FIXED else 1)
    if enc.access.strategy == STRATEGY_FIXED:
        bitmap = np.zeros(grid.n_blocks, dtype=np.uint8)
        bitmap[list(enc.access.blocks)] = 1
        w.write_bits(bitmap)
        w.align()
    else:
        w.write_struct("<H", len(enc.access.blocks))
        for b in enc.access.blocks:
            w.write_struct("<H", b)
    w.write_struct("<Q", report.total_bits)

    for idx, ctx in _mode_table_entries(grid, enc.access):
        w.write_uint(enc.modes[(idx, ctx)], MODE_ID_BITS)
    w.align()

    for idx in range(grid.n_blocks):
        bs = enc.streams[idx]
        for pc in bs.planes:
            w.write_struct("<HB", pc.crc, len(pc.order))
            for k, ctx in enumerate(pc.order):
                w.write_struct("<BH", ctx, pc.cum_bits[k])
                if enc.mode == MODE_PRACTICAL:
                    w.write_struct("<B", pc.cross_idx[k])
            w.write_struct("<H", pc.completion_bits)
            if enc.mode == MODE_PRACTICAL:
                w.write_bits(pc.prefix)
            else:
                w.write_bits(pc.raw)
            w.align()
    return w.getvalue()


def parse(data: bytes) -> EncodedImage:
    """Rebuild decodable state from container bytes.

    The returned object carries the directories, payloads, mode table and
    access set; pixel-side arrays (levels, reconstructions, source planes)
    are None until a session decodes blocks.
    """
    r = BitReader(data)
    (magic, version, mode_tag, pref, width, height, block_size, qp,
     n_planes, seed, _iters, _patience) = r.read_struct("<4sBBBHHHBBIHH")
    if magic != MAGIC:
        raise ContainerError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ContainerError(f"unsupported version {version}")
    mode = MODE_THEORETICAL if mode_tag == 0 else MODE_PRACTICAL
    fov_h, fov_v, vp_w, vp_h, _, _ = r.read_struct("<ddHHdd")
    (strategy_tag,) = r.read_struct("<B")
    grid = BlockGrid(width, height, block_size)
    n = block_size * block_size
    if strategy_tag == 0:
        bitmap = r.read_bits(grid.n_blocks)
        r.align()
        access = AccessBlockSet(tuple(int(i) for i in np.nonzero(bitmap)[0]),
                                STRATEGY_FIXED, grid.n_blocks)
    else:
        (count,) = r.read_struct("<H")
        blocks = tuple(r.read_struct("<H")[0] for _ in range(count))
        access = AccessBlockSet(blocks, STRATEGY_CONTENT, grid.n_blocks)
    (declared_s,) = r.read_struct("<Q")

    spec = ViewportSpec(Direction(0.0, 0.0), fov_h, fov_v, vp_w, vp_h)
    enc = EncodedImage(
        width=width, height=height, block_size=block_size, qp=qp, mode=mode,
        seed=seed, n_planes=n_planes, prefer_horizontal=bool(pref), grid=grid,
        access=access, placement_spec=spec, levels=None, recon=None,
        planes=None, modes={},
    )
    for idx, ctx in _mode_table_entries(grid, access):
        enc.modes[(idx, ctx)] = r.read_uint(MODE_ID_BITS)
    r.align()

    for idx in range(grid.n_blocks):
        is_access = idx in access
        bs = IncrementalBitstream(n=n, mode=mode, is_access=is_access)
        for _p in range(n_planes):
            crc, n_chunks = r.read_struct("<HB")
            order, cum, cross = [], [], []
            for _ in range(n_chunks):
                ctx, c = r.read_struct("<BH")
                order.append(ctx)
                cum.append(c)
                if mode == MODE_PRACTICAL:
                    cross.append(r.read_struct("<B")[0])
                else:
                    cross.append(0)
            (completion,) = r.read_struct("<H")
            if cum != sorted(cum) or (cum and cum[-1] > n):
                raise ContainerError(f"inconsistent directory in block {idx}")
            stored = cum[-1] if cum else 0
            expected_completion = (n - stored) if is_access else 0
            if completion != expected_completion:
                raise ContainerError(f"bad completion length in block {idx}")
            if mode == MODE_PRACTICAL:
                prefix = r.read_bits(stored + completion)
                raw = None
            else:
                prefix = None
                raw = r.read_bits(n)
            r.align()
            bs.planes.append(PlaneCode(order=order, cum_bits=cum,
                                       cross_idx=cross, crc=crc,
                                       completion_bits=completion,
                                       prefix=prefix, raw=raw))
        enc.streams.append(bs)
    report = storage_report(enc)
    if report.total_bits != declared_s:
        raise ContainerError(
            f"declared S {declared_s} != recomputed {report.total_bits}")
    return enc


def save(enc: EncodedImage, path):
    with open(path, "wb") as fh:
        fh.write(serialize(enc))


def load(path) -> EncodedImage:
    with open(path, "rb") as fh:
        return parse(fh.read())


# Head traces ------------------------------------------------------------

@dataclass
class HeadTrace:
    """Recorded gaze directions per user, 200 ms sampling."""

    users: dict  # user_id -> list[(t_ms, Direction)]

    @property
    def n_users(self) -> int:
        return len(self.users)


def load_trace(path) -> HeadTrace:
    import csv

    users: dict = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return HeadTrace(users={})
        expected = ["user_id", "t_ms", "longitude_rad", "latitude_rad"]
        if [h.strip() for h in header] != expected:
            raise ValueError(f"trace header must be {','.join(expected)}")
        for ln, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"line {ln}: expected 4 fields")
            try:
                user = row[0].strip()
                t_ms = int(row[1])
                lon = float(row[2])
                lat = float(row[3])
            except ValueError as exc:
                raise ValueError(f"line {ln}: {exc}") from None
            if not -math.pi <= lon < math.pi + 1e-12:
                raise ValueError(f"line {ln}: longitude {lon} out of range")
            if not -math.pi / 2 <= lat <= math.pi / 2:
                raise ValueError(f"line {ln}: latitude {lat} out of range")
            rec = users.setdefault(user, [])
            if rec and t_ms <= rec[-1][0]:
                raise ValueError(f"line {ln}: non-monotone time for {user}")
            rec.append((t_ms, Direction(lon, lat)))
    return HeadTrace(users=users)
