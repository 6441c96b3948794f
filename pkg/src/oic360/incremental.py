"""Incremental multi-side-information entropy coder.

Each bitplane of a block is syndrome-encoded once at the rate of its worst
prediction; per plane the admissible contexts are sorted best-to-worst by
rate, and the stored accumulated-syndrome prefix is cut into per-context
chunks.  Extraction for a context returns the prefix up to that context's
rank, so better predictions strictly reuse the bits stored for worse ones.
Access blocks append a completion chunk that tops every plane up to the full
code length, enabling decoding with no prior neighbor.

Two accounting modes exist: "practical" stores real syndrome bits whose rung
was validated by encoder-side trial decoding (the decoder therefore never
fails on intact data), while "theoretical" transports planes losslessly and
charges the information-theoretic conditional rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import ldpc
from .blocks import EMPTY
from .ldpc import LADDER_STEPS, SyndromeCode, binary_entropy

MODE_THEORETICAL = "theoretical"
MODE_PRACTICAL = "practical"
MODES = (MODE_THEORETICAL, MODE_PRACTICAL)

CHECKSUM_BITS = 16
MODE_ID_BITS = 4
CROSS_TABLE_SIZE = 256


class DecodingFailure(Exception):
    """Stream corruption or side-information mismatch."""


# CRC-16/CCITT-FALSE over the packed plane bytes.
_CRC_TABLE = None


def _crc_table():
    global _CRC_TABLE
    if _CRC_TABLE is None:
        table = np.zeros(256, dtype=np.uint16)
        for byte in range(256):
            crc = byte << 8
            for _ in range(8):
                crc = ((crc << 1) ^ 0x1021 if crc & 0x8000 else crc << 1) & 0xFFFF
            table[byte] = crc
        _CRC_TABLE = table
    return _CRC_TABLE


def plane_checksum(plane: np.ndarray) -> int:
    table = _crc_table()
    crc = 0xFFFF
    for byte in np.packbits(plane.astype(np.uint8)):
        crc = ((crc << 8) & 0xFFFF) ^ int(table[(crc >> 8) ^ byte])
    return crc


def estimate_crossover(x_plane: np.ndarray, y_plane: np.ndarray) -> float:
    """Empirical bit-flip probability between two planes, clamped away from
    the degenerate endpoints to keep decoder likelihoods finite."""
    if x_plane.shape != y_plane.shape:
        raise ValueError("bitplane lengths differ")
    n = x_plane.shape[0]
    p = float(np.count_nonzero(x_plane != y_plane)) / n
    return min(max(p, 1.0 / (2 * n)), 0.5)


def crossover_table(n: int) -> np.ndarray:
    lo = 1.0 / (2 * n)
    hi = 0.5
    i = np.arange(CROSS_TABLE_SIZE)
    return np.exp(np.log(lo) + i * (np.log(hi) - np.log(lo))
                  / (CROSS_TABLE_SIZE - 1))


def quantize_crossover(p: float, n: int) -> int:
    lo = 1.0 / (2 * n)
    hi = 0.5
    idx = round((CROSS_TABLE_SIZE - 1) * (math.log(p) - math.log(lo))
                / (math.log(hi) - math.log(lo)))
    return min(max(idx, 0), CROSS_TABLE_SIZE - 1)


def theoretical_bits(x_plane: np.ndarray, y_plane: np.ndarray) -> int:
    n = x_plane.shape[0]
    return math.ceil(n * binary_entropy(estimate_crossover(x_plane, y_plane)))


def _practical_rung(x_plane, y_plane, code: SyndromeCode, acc_x=None):
    """Smallest ladder rung whose prefix trial-decodes the plane.

    The scan starts at the first rung at or above the conditional entropy
    (below it decoding is hopeless), guaranteeing practical >= theoretical.
    Returns (rung, crossover_index).
    """
    n = code.n
    p_raw = estimate_crossover(x_plane, y_plane)
    idx = quantize_crossover(p_raw, n)
    p_hat = float(crossover_table(n)[idx])
    if acc_x is None:
        acc_x = code.accumulated(x_plane)
    start = code.rung_for_bits(math.ceil(n * binary_entropy(p_raw)))
    for t in range(start, LADDER_STEPS):
        got = code.decode_rung(code.prefix_bits(acc_x, code.rung_bits(t)),
                               t, y_plane, p_hat)
        if got is not None and np.array_equal(got, x_plane):
            return t, idx
    return LADDER_STEPS, idx


def required_rate(x_plane: np.ndarray, si_plane: np.ndarray, mode: str,
                  code: SyndromeCode | None = None) -> int:
    """Bits needed to decode a source plane from one side-information plane."""
    if mode == MODE_THEORETICAL:
        return theoretical_bits(x_plane, si_plane)
    if mode != MODE_PRACTICAL:
        raise ValueError(f"unknown mode {mode!r}")
    if code is None:
        code = ldpc.get_code(x_plane.shape[0])
    rung, _ = _practical_rung(x_plane, si_plane, code)
    return code.rung_bits(rung)


@dataclass
class PlaneCode:
    """One bitplane's stored description."""

    order: list          # context ids, best rate first
    cum_bits: list       # prefix length in bits after each rank
    cross_idx: list      # quantized crossover per rank (practical mode)
    crc: int
    completion_bits: int  # access blocks: bits topping the plane up to n
    prefix: np.ndarray | None = None  # stored syndrome bits, transmission order
    raw: np.ndarray | None = None     # lossless transport (theoretical)

    def rank_of(self, ctx: int) -> int:
        return self.order.index(ctx)

    def chunk_sizes(self):
        prev = 0
        out = []
        for c in self.cum_bits:
            out.append(c - prev)
            prev = c
        return out


@dataclass
class IncrementalBitstream:
    """All stored planes of one block."""

    n: int
    mode: str
    is_access: bool
    planes: list = field(default_factory=list)

    @property
    def stored_payload_bits(self) -> int:
        """Syndrome prefix bits kept on the server (excludes completion)."""
        return sum(pc.cum_bits[-1] if pc.cum_bits else 0 for pc in self.planes)

    @property
    def completion_bits(self) -> int:
        return sum(pc.completion_bits for pc in self.planes)


@dataclass
class ExtractedBlock:
    """Prefix extraction for one block and one context."""

    ctx: int
    mode: str
    n: int
    nbits: list                 # per plane: prefix length
    payload: list               # per plane: syndrome bits (practical) or None
    cross_idx: list             # per plane: crossover index for the used rank
    raw: list                   # per plane: lossless transport (theoretical)
    crc: list

    @property
    def code_bits(self) -> int:
        return sum(self.nbits)


def encode_block(x_planes: np.ndarray, predictions: dict, is_access: bool,
                 mode: str, code: SyndromeCode) -> IncrementalBitstream:
    """Encode all bitplanes of a block against its candidate predictions.

    predictions maps context id to a (P, n) plane array.  Per plane, contexts
    are sorted by rate (ties by id) so stored chunks realize the incremental
    prefix structure.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    n_planes, n = x_planes.shape
    if not predictions and not is_access:
        raise ValueError("a block needs a prediction context or access status")
    bs = IncrementalBitstream(n=n, mode=mode, is_access=is_access)
    for p in range(n_planes):
        x = np.ascontiguousarray(x_planes[p])
        acc = code.accumulated(x) if mode == MODE_PRACTICAL else None
        entries = []
        for ctx in sorted(predictions):
            y = np.ascontiguousarray(predictions[ctx][p])
            if mode == MODE_THEORETICAL:
                entries.append((theoretical_bits(x, y), ctx, 0))
            else:
                rung, cidx = _practical_rung(x, y, code, acc_x=acc)
                entries.append((code.rung_bits(rung), ctx, cidx))
        entries.sort(key=lambda e: (e[0], e[1]))
        stored = entries[-1][0] if entries else 0
        completion = (n - stored) if is_access else 0
        bs.planes.append(PlaneCode(
            order=[e[1] for e in entries],
            cum_bits=[e[0] for e in entries],
            cross_idx=[e[2] for e in entries],
            crc=plane_checksum(x),
            completion_bits=completion,
            prefix=code.prefix_bits(acc, stored + completion)
            if mode == MODE_PRACTICAL else None,
            raw=x.copy() if mode == MODE_THEORETICAL else None,
        ))
    return bs


def extract(bs: IncrementalBitstream, ctx: int) -> ExtractedBlock:
    """Chunk prefix for a context; the empty context takes everything."""
    nbits, payload, cross, raw, crc = [], [], [], [], []
    for pc in bs.planes:
        if ctx == EMPTY:
            if not bs.is_access:
                raise ValueError("empty context only stored for access blocks")
            bits = bs.n
            cidx = 0
        else:
            if ctx not in pc.order:
                raise ValueError(f"context {ctx} not stored")
            rank = pc.rank_of(ctx)
            bits = pc.cum_bits[rank]
            cidx = pc.cross_idx[rank]
        nbits.append(bits)
        cross.append(cidx)
        payload.append(pc.prefix[:bits]
                       if bs.mode == MODE_PRACTICAL else None)
        raw.append(pc.raw)
        crc.append(pc.crc)
    return ExtractedBlock(ctx=ctx, mode=bs.mode, n=bs.n, nbits=nbits,
                          payload=payload, cross_idx=cross, raw=raw, crc=crc)


def decode_block(ext: ExtractedBlock, si_planes, code: SyndromeCode) -> np.ndarray:
    """Reproduce the encoder's bitplanes from an extraction.

    si_planes is a (P, n) array of side-information planes (ignored for the
    empty context).  Raises DecodingFailure on corruption or mismatched side
    information.
    """
    n_planes = len(ext.nbits)
    out = np.empty((n_planes, ext.n), dtype=np.uint8)
    table = crossover_table(ext.n)
    for p in range(n_planes):
        if ext.mode == MODE_THEORETICAL:
            plane = ext.raw[p]
        else:
            bits = ext.payload[p]
            t = ext.nbits[p] // code.step
            if ext.ctx == EMPTY or t == LADDER_STEPS:
                plane = code.solve_full(bits)
            else:
                plane = code.decode_rung(bits, t, np.ascontiguousarray(
                    si_planes[p]), float(table[ext.cross_idx[p]]))
                if plane is None:
                    raise DecodingFailure(
                        f"belief propagation failed on plane {p}")
        if plane_checksum(plane) != ext.crc[p]:
            raise DecodingFailure(f"checksum mismatch on plane {p}")
        out[p] = plane
    return out
