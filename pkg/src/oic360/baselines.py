"""Tile-based and exhaustive-storage baselines on the shared block machinery.

Baselines reuse the per-(block, context) rates of an encoded image, so
comparisons against the incremental coder are same-machinery relative: a tile
block's single fixed context costs exactly what the incremental stream
charges for that context.  Within a tile, blocks decode in raster order with
no cross-tile references; the tile's first block is its access point.

The exhaustive-storage scheme stores one independent stream per (block,
context) pair.  It transmits at the identical conditional rates but pays the
sum instead of the maximum in storage.  It is an accounting baseline only
(never serialized).
"""

from __future__ import annotations

from dataclasses import dataclass

from .blocks import EMPTY, BlockGrid, available_contexts, context_set_for
from .encoder import EncodedImage
from .incremental import CHECKSUM_BITS, MODE_ID_BITS, MODE_PRACTICAL

TILE_REGULAR = "regular"
TILE_OPT = "opt"
TILE_FULL = "full"


@dataclass(frozen=True)
class Tile:
    row0: int
    row1: int
    col0: int
    col1: int

    def blocks(self, grid: BlockGrid):
        return [grid.index(r, c)
                for r in range(self.row0, self.row1)
                for c in range(self.col0, self.col1)]


@dataclass
class TileLayout:
    tag: str
    tiles: list

    @property
    def n_tiles(self) -> int:
        return len(self.tiles)

    def tile_of(self, grid: BlockGrid, block: int) -> int:
        r, c = grid.row_col(block)
        for t, tile in enumerate(self.tiles):
            if tile.row0 <= r < tile.row1 and tile.col0 <= c < tile.col1:
                return t
        raise ValueError(f"block {block} not covered by layout")


def regular_layout(grid: BlockGrid, m: int, n: int) -> TileLayout:
    """m x n near-uniform tile grid (m vertical, n horizontal tiles)."""
    if m < 1 or n < 1 or m > grid.rows or n > grid.cols:
        raise ValueError("tile counts must fit the block grid")
    rb = [grid.rows * i // m for i in range(m + 1)]
    cb = [grid.cols * j // n for j in range(n + 1)]
    tiles = [Tile(rb[i], rb[i + 1], cb[j], cb[j + 1])
             for i in range(m) for j in range(n)]
    tag = TILE_FULL if m == n == 1 else f"{TILE_REGULAR}{m}x{n}"
    return TileLayout(tag, tiles)


def opt_layout(grid: BlockGrid) -> TileLayout:
    """Top quarter one tile, bottom quarter one tile, middle half split into
    four equal-width tiles."""
    top = grid.rows // 4
    bottom = grid.rows - grid.rows // 4
    cb = [grid.cols * j // 4 for j in range(5)]
    tiles = [Tile(0, top, 0, grid.cols)]
    tiles += [Tile(top, bottom, cb[j], cb[j + 1]) for j in range(4)]
    tiles.append(Tile(bottom, grid.rows, 0, grid.cols))
    return TileLayout(TILE_OPT, tiles)


def layout_from_tag(grid: BlockGrid, tag: str) -> TileLayout:
    if tag == "topt":
        return opt_layout(grid)
    if tag.startswith("t") and "x" in tag:
        m, n = tag[1:].split("x")
        return regular_layout(grid, int(m), int(n))
    raise ValueError(f"unknown tile layout {tag!r}")


def tile_context_assignment(grid: BlockGrid, layout: TileLayout) -> dict:
    """Fixed context per block under within-tile raster decoding; the tile's
    first block uses the empty context."""
    assign = {}
    for tile in layout.tiles:
        decoded: set = set()
        for b in tile.blocks(grid):
            if not decoded:
                assign[b] = EMPTY
            else:
                assign[b] = available_contexts(grid, b, decoded)
            decoded.add(b)
    return assign


def _per_plane_dir_bits(mode: str, n_chunks: int = 1) -> int:
    per_chunk = 8 + 16 + (8 if mode == MODE_PRACTICAL else 0)
    return 8 + n_chunks * per_chunk + 16


@dataclass
class TileEncoding:
    layout: TileLayout
    assignment: dict
    block_bits: dict        # block -> transmitted bits (code + crc + mode)
    tile_bits: list         # per tile: sum of its block bits
    storage_bits: int

    def request_tiles(self, grid: BlockGrid, footprint) -> list:
        hit = set()
        for b in footprint:
            hit.add(self.layout.tile_of(grid, b))
        return sorted(hit)


def tile_encode(enc: EncodedImage, layout: TileLayout) -> TileEncoding:
    """Per-tile streams and total storage under a tile layout, using the
    encoded image's own rate tables."""
    grid = enc.grid
    n, p = enc.n, enc.n_planes
    assign = tile_context_assignment(grid, layout)
    block_bits = {}
    storage = 0
    for b in range(grid.n_blocks):
        ctx = assign[b]
        if ctx == EMPTY:
            code_bits = n * p
        else:
            code_bits = enc.code_bits(b, ctx)
        bits = code_bits + CHECKSUM_BITS * p
        if ctx != EMPTY:
            bits += MODE_ID_BITS
        block_bits[b] = bits
        storage += bits + _per_plane_dir_bits(enc.mode) * p
    tile_bits = [sum(block_bits[b] for b in tile.blocks(grid))
                 for tile in layout.tiles]
    from .container import storage_report  # header size model
    header = storage_report(enc).fixed_header_bits
    return TileEncoding(layout, assign, block_bits, tile_bits,
                        storage_bits=storage + header)


@dataclass
class ESEncoding:
    """Exhaustive storage: every (block, context) residual kept separately."""

    storage_bits: int

    @staticmethod
    def transmit_bits(enc: EncodedImage, block: int, ctx: int) -> int:
        return enc.transmit_bits(block, ctx)


def es_encode(enc: EncodedImage) -> ESEncoding:
    grid = enc.grid
    n, p = enc.n, enc.n_planes
    storage = 0
    for b in range(grid.n_blocks):
        for ctx in context_set_for(grid, b, is_access=b in enc.access):
            if ctx == EMPTY:
                code_bits = n * p
                mode_bits = 0
            else:
                code_bits = enc.code_bits(b, ctx)
                mode_bits = MODE_ID_BITS
            storage += (code_bits + CHECKSUM_BITS * p + mode_bits
                        + _per_plane_dir_bits(enc.mode) * p)
    from .container import storage_report
    return ESEncoding(storage_bits=storage + storage_report(enc).fixed_header_bits)
