"""Whole-image encoder: blocks are coded once, against every admissible
prediction context, so any decoding order is servable afterwards.

Reconstructions depend only on a block's own quantized levels, never on the
path that decoded it, so the encoder can reconstruct every block up front and
derive all candidate predictions from those reconstructions exactly as the
decoder will.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import codec_core, ldpc
from .blocks import (
    EMPTY,
    N_MODES,
    BlockGrid,
    context_set_for,
    predict_block,
)
from .geom import Direction, PlaneImage, ViewportSpec
from .incremental import (
    CHECKSUM_BITS,
    MODE_ID_BITS,
    MODE_THEORETICAL,
    encode_block,
)
from .incremental import theoretical_bits as theoretical_rate_bits
from .ldpc import binary_entropy
from .placement import (
    STRATEGY_CONTENT,
    STRATEGY_FIXED,
    AccessBlockSet,
    place_content,
    place_fixed,
)


@dataclass
class EncodedImage:
    """Complete server-side state for one (image, qp, mode) encode."""

    width: int
    height: int
    block_size: int
    qp: int
    mode: str
    seed: int
    n_planes: int
    prefer_horizontal: bool
    grid: BlockGrid
    access: AccessBlockSet
    placement_spec: ViewportSpec
    levels: np.ndarray            # (n_blocks, bs, bs) int32
    recon: np.ndarray             # (H, W) uint8
    planes: np.ndarray            # (n_blocks, P, n) uint8
    modes: dict                   # (block, ctx) -> intra mode id
    streams: list = field(default_factory=list)  # IncrementalBitstream per block

    @property
    def n(self) -> int:
        return self.block_size * self.block_size

    @property
    def code(self) -> ldpc.SyndromeCode:
        return ldpc.get_code(self.n, self.seed)

    # Rate accounting ----------------------------------------------------
    def code_bits(self, block: int, ctx: int) -> int:
        """Syndrome bits extracted when a block is decoded with a context."""
        bs = self.streams[block]
        if ctx == EMPTY:
            if not bs.is_access:
                raise ValueError(f"block {block} is not an access block")
            return self.n * self.n_planes
        return sum(pc.cum_bits[pc.rank_of(ctx)] for pc in bs.planes)

    def transmit_bits(self, block: int, ctx: int) -> int:
        """Extraction bits plus per-plane checksums and the mode id."""
        bits = self.code_bits(block, ctx) + CHECKSUM_BITS * self.n_planes
        if ctx != EMPTY:
            bits += MODE_ID_BITS
        return bits

    def stored_payload_bits(self) -> int:
        return sum(s.stored_payload_bits for s in self.streams)

    def completion_bits(self) -> int:
        return sum(s.completion_bits for s in self.streams)


def block_planes(levels: np.ndarray, n_planes: int) -> np.ndarray:
    return codec_core.bitplane_split(levels, n_planes).planes


def independent_rate_proxy(planes: np.ndarray) -> float:
    """Order-0 entropy estimate of coding a block with no reference; used as
    the per-block cost by the content-based placement strategy."""
    n_planes, n = planes.shape
    bits = 0.0
    for p in range(n_planes):
        bits += math.ceil(n * binary_entropy(float(planes[p].mean())))
    return bits + CHECKSUM_BITS * n_planes


def encode_image(img: PlaneImage, qp: int, mode: str = MODE_THEORETICAL,
                 block_size: int = 32, seed: int = ldpc.DEFAULT_SEED,
                 placement_spec: ViewportSpec | None = None,
                 strategy: str = STRATEGY_FIXED,
                 prefer_horizontal: bool = True,
                 sweep_lon: float | None = None,
                 sweep_lat: float | None = None) -> EncodedImage:
    if img.width != 2 * img.height:
        raise ValueError("equirectangular input must be 2:1")
    grid = BlockGrid(img.width, img.height, block_size)
    spec = placement_spec or ViewportSpec(direction=Direction(0.0, 0.0))
    n = block_size * block_size

    # Transform + quantize every block; one shared plane count per image.
    levels = np.empty((grid.n_blocks, block_size, block_size), dtype=np.int32)
    for idx in range(grid.n_blocks):
        coeffs = codec_core.forward_transform(
            grid.get_block(img.samples, idx).astype(np.int64))
        levels[idx] = codec_core.quantize(coeffs, qp)
    n_planes = codec_core.plane_count_for(int(np.abs(levels).max()))

    recon = np.empty((img.height, img.width), dtype=np.uint8)
    planes = np.empty((grid.n_blocks, n_planes, n), dtype=np.uint8)
    for idx in range(grid.n_blocks):
        grid.set_block(recon, idx, codec_core.reconstruct(levels[idx], qp))
        planes[idx] = block_planes(levels[idx], n_planes)

    if strategy == STRATEGY_FIXED:
        access = place_fixed(grid, spec, sweep_lon, sweep_lat)
    elif strategy == STRATEGY_CONTENT:
        proxies = [independent_rate_proxy(planes[idx])
                   for idx in range(grid.n_blocks)]
        access = place_content(grid, proxies, spec, sweep_lon, sweep_lat)
    else:
        raise ValueError(f"unknown placement strategy {strategy!r}")

    enc = EncodedImage(
        width=img.width, height=img.height, block_size=block_size, qp=qp,
        mode=mode, seed=seed, n_planes=n_planes,
        prefer_horizontal=prefer_horizontal, grid=grid, access=access,
        placement_spec=spec, levels=levels, recon=recon, planes=planes,
        modes={},
    )
    code = enc.code
    for idx in range(grid.n_blocks):
        is_access = idx in access
        preds = {}
        for ctx in context_set_for(grid, idx, is_access=False):
            m, si_planes = _select_mode_by_rate(enc, idx, ctx)
            enc.modes[(idx, ctx)] = m
            preds[ctx] = si_planes
        enc.streams.append(encode_block(planes[idx], preds, is_access, mode, code))
    return enc


def _select_mode_by_rate(enc: EncodedImage, idx: int, ctx: int):
    """Pick the prediction mode minimizing the conditional bitplane rate.

    Minimizing pixel-domain error is the conventional choice, but the actual
    cost here is the per-plane crossover entropy, and the two disagree often
    enough that a richer context could otherwise code worse than a subset of
    itself.  Ties take the lowest mode id; both coding modes share this
    selection (the mode is signaled, so the decoder never re-derives it).
    """
    best = None
    for mode_id in range(N_MODES):
        pred = predict_block(enc.recon, enc.grid, idx, ctx, mode_id)
        si_levels = codec_core.quantize(
            codec_core.forward_transform(pred.astype(np.int64)), enc.qp)
        si = block_planes(si_levels, enc.n_planes)
        bits = sum(theoretical_rate_bits(enc.planes[idx][p], si[p])
                   for p in range(enc.n_planes))
        if best is None or bits < best[0]:
            best = (bits, mode_id, si)
    return best[1], best[2]


def si_planes_for(recon: np.ndarray, grid: BlockGrid, idx: int, ctx: int,
                  mode_id: int, qp: int, n_planes: int) -> np.ndarray:
    """Side-information planes a decoder derives from its reconstructions."""
    pred = predict_block(recon, grid, idx, ctx, mode_id)
    si_levels = codec_core.quantize(
        codec_core.forward_transform(pred.astype(np.int64)), qp)
    return block_planes(si_levels, n_planes)
