"""Block grid with horizontal wraparound, prediction contexts, intra prediction.

Context ids (wire values): 0 is the empty context (access-block entry point);
1-4 are single-neighbor contexts (left, right, top, bottom); 5-8 add a
perpendicular border (top-left .. bottom-right); 9-12 additionally include the
shared diagonal corner block.  A prediction is formed by mapping the block's
neighborhood into a canonical orientation (references on top/left) and
evaluating one of 10 modes: DC, planar and 8 angular directions in 22.5-degree
steps.
"""

from __future__ import annotations

import numpy as np

EMPTY = 0
T1_L, T1_R, T1_T, T1_B = 1, 2, 3, 4
T2_TL, T2_TR, T2_BL, T2_BR = 5, 6, 7, 8
T3_TL, T3_TR, T3_BL, T3_BR = 9, 10, 11, 12

ALL_CONTEXTS = tuple(range(1, 13))

# Realizability preference: type 3 before type 2 before type 1, fixed
# tie order within each type.
CONTEXT_PREFERENCE = (
    T3_TL, T3_TR, T3_BL, T3_BR,
    T2_TL, T2_TR, T2_BL, T2_BR,
    T1_L, T1_R, T1_T, T1_B,
)

# Neighbor offsets (drow, dcol); columns wrap.
_OFFSETS = {
    "L": (0, -1), "R": (0, 1), "T": (-1, 0), "B": (1, 0),
    "TL": (-1, -1), "TR": (-1, 1), "BL": (1, -1), "BR": (1, 1),
}

# Required neighbor positions per context.
CONTEXT_NEIGHBORS = {
    T1_L: ("L",), T1_R: ("R",), T1_T: ("T",), T1_B: ("B",),
    T2_TL: ("T", "L"), T2_TR: ("T", "R"),
    T2_BL: ("B", "L"), T2_BR: ("B", "R"),
    T3_TL: ("T", "L", "TL"), T3_TR: ("T", "R", "TR"),
    T3_BL: ("B", "L", "BL"), T3_BR: ("B", "R", "BR"),
}

MODE_DC = 0
MODE_PLANAR = 1
N_MODES = 10

# Angular displacement per mode id: (main axis, displacement in 1/32 px).
_ANGULAR = {
    2: ("top", 0), 3: ("top", 13), 4: ("top", -13), 5: ("top", 32),
    6: ("left", 0), 7: ("left", 13), 8: ("left", -13), 9: ("left", 32),
}


class BlockGrid:
    """Row-major partition of an equirectangular image into square blocks."""

    def __init__(self, width: int, height: int, block_size: int = 32):
        if width % block_size or height % block_size:
            raise ValueError(
                f"block_size {block_size} must divide {width}x{height}"
            )
        self.width = width
        self.height = height
        self.block_size = block_size
        self.cols = width // block_size
        self.rows = height // block_size
        self.n_blocks = self.rows * self.cols

    def index(self, row: int, col: int) -> int:
        return row * self.cols + col % self.cols

    def row_col(self, idx: int):
        return divmod(idx, self.cols)

    def neighbor(self, idx: int, pos: str):
        """Neighbor block index at a relative position, or None.

        Columns wrap around (leftmost and rightmost blocks of a row are
        adjacent on the sphere); there is nothing above the top row or
        below the bottom row.
        """
        r, c = self.row_col(idx)
        dr, dc = _OFFSETS[pos]
        nr = r + dr
        if nr < 0 or nr >= self.rows:
            return None
        return self.index(nr, c + dc)

    def neighbors(self, idx: int):
        """The up-to-4 adjacent block indices (L, R, T, B order)."""
        out = []
        for pos in ("L", "R", "T", "B"):
            n = self.neighbor(idx, pos)
            if n is not None:
                out.append(n)
        return out

    def block_slices(self, idx: int):
        r, c = self.row_col(idx)
        bs = self.block_size
        return slice(r * bs, (r + 1) * bs), slice(c * bs, (c + 1) * bs)

    def get_block(self, samples: np.ndarray, idx: int) -> np.ndarray:
        ys, xs = self.block_slices(idx)
        return samples[ys, xs]

    def set_block(self, samples: np.ndarray, idx: int, block: np.ndarray):
        ys, xs = self.block_slices(idx)
        samples[ys, xs] = block

    def block_of_pixel(self, x: float, y: float) -> int:
        bs = self.block_size
        col = int(x % self.width) // bs
        row = min(int(y), self.height - 1) // bs
        return self.index(row, col)


def partition(samples: np.ndarray, block_size: int = 32) -> BlockGrid:
    h, w = samples.shape
    return BlockGrid(w, h, block_size)


def reassemble(grid: BlockGrid, blocks) -> np.ndarray:
    """Stitch per-block arrays (indexed row-major) back into an image."""
    out = np.zeros((grid.height, grid.width), dtype=np.asarray(blocks[0]).dtype)
    for idx in range(grid.n_blocks):
        grid.set_block(out, idx, blocks[idx])
    return out


def context_admissible(grid: BlockGrid, idx: int, ctx: int) -> bool:
    return all(grid.neighbor(idx, pos) is not None
               for pos in CONTEXT_NEIGHBORS[ctx])


def context_set_for(grid: BlockGrid, idx: int, is_access: bool = False):
    """Admissible context ids for a block, ascending; empty context first
    when the block is an access block."""
    out = [c for c in ALL_CONTEXTS if context_admissible(grid, idx, c)]
    if is_access:
        out = [EMPTY] + out
    return out


def available_contexts(grid: BlockGrid, idx: int, decoded_set) -> int:
    """Best context realizable from a set of already-decoded blocks.

    Type 3 beats type 2 beats type 1; ties break in the fixed preference
    order.  Returns EMPTY when no neighbor is decoded.
    """
    for ctx in CONTEXT_PREFERENCE:
        needed = [grid.neighbor(idx, pos) for pos in CONTEXT_NEIGHBORS[ctx]]
        if all(n is not None and n in decoded_set for n in needed):
            return ctx
    return EMPTY


# Patch transforms that rotate each context into the canonical top/left
# orientation, paired with their inverses for the predicted block.
def _t_id(a):
    return a


def _t_lr(a):
    return a[:, ::-1]


def _t_ud(a):
    return a[::-1, :]


def _t_rot180(a):
    return a[::-1, ::-1]


def _t_transpose(a):
    return a.T


def _t_ud_then_transpose(a):
    return a[::-1, :].T


def _t_transpose_then_ud(a):
    return a.T[::-1, :]


_CTX_TRANSFORM = {
    T1_L: (_t_id, _t_id),
    T1_R: (_t_lr, _t_lr),
    T1_T: (_t_transpose, _t_transpose),
    T1_B: (_t_ud_then_transpose, _t_transpose_then_ud),
    T2_TL: (_t_id, _t_id), T3_TL: (_t_id, _t_id),
    T2_TR: (_t_lr, _t_lr), T3_TR: (_t_lr, _t_lr),
    T2_BL: (_t_ud, _t_ud), T3_BL: (_t_ud, _t_ud),
    T2_BR: (_t_rot180, _t_rot180), T3_BR: (_t_rot180, _t_rot180),
}

_HAS_TOP_REF = {T2_TL, T2_TR, T2_BL, T2_BR, T3_TL, T3_TR, T3_BL, T3_BR}
_HAS_CORNER = {T3_TL, T3_TR, T3_BL, T3_BR}


def _assemble_patch(recon: np.ndarray, grid: BlockGrid, idx: int, ctx: int):
    """3x3-block neighborhood around the block, required neighbors filled."""
    bs = grid.block_size
    patch = np.zeros((3 * bs, 3 * bs), dtype=np.int64)
    for pos in CONTEXT_NEIGHBORS[ctx]:
        n = grid.neighbor(idx, pos)
        if n is None:
            raise ValueError(f"context {ctx} not admissible for block {idx}")
        dr, dc = _OFFSETS[pos]
        patch[(dr + 1) * bs:(dr + 2) * bs, (dc + 1) * bs:(dc + 2) * bs] = \
            grid.get_block(recon, n)
    return patch


def canonical_refs(recon: np.ndarray, grid: BlockGrid, idx: int, ctx: int):
    """Reference row/column/corner in canonical orientation for a context.

    Single-neighbor contexts synthesize the missing top references from the
    available column; two-border contexts without a decoded corner use the
    average of the two adjacent reference ends.
    """
    if ctx == EMPTY:
        raise ValueError("the empty context has no references")
    bs = grid.block_size
    fwd, _ = _CTX_TRANSFORM[ctx]
    patch = fwd(_assemble_patch(recon, grid, idx, ctx))
    # Transposed single-ref contexts (T1_T/T1_B) expose their reference row
    # as the canonical left column; missing top references replicate its end.
    left = patch[bs:2 * bs, bs - 1].copy()
    if ctx in _HAS_TOP_REF:
        top = patch[bs - 1, bs:2 * bs].copy()
    else:
        top = np.full(bs, left[0], dtype=np.int64)
    if ctx in _HAS_CORNER:
        corner = int(patch[bs - 1, bs - 1])
    elif ctx in {T2_TL, T2_TR, T2_BL, T2_BR}:
        corner = (int(top[0]) + int(left[0]) + 1) >> 1
    else:
        corner = int(left[0])
    return top, left, corner


def _ref_line(main: np.ndarray, side: np.ndarray, corner: int, n: int):
    """Extended reference: [side reversed | corner | main | clamp], index
    offset n+1 maps position -(n+1) to array index 0."""
    ext = np.empty(3 * n + 1, dtype=np.int64)
    ext[:n] = side[::-1]
    ext[n] = corner
    ext[n + 1:2 * n + 1] = main
    ext[2 * n + 1:] = main[-1]
    return ext


def predict_canonical(mode: int, top: np.ndarray, left: np.ndarray,
                      corner: int, n: int) -> np.ndarray:
    """One prediction mode in canonical orientation; integer arithmetic."""
    if mode == MODE_DC:
        dc = (int(top.sum()) + int(left.sum()) + n) // (2 * n)
        return np.full((n, n), dc, dtype=np.int64)
    if mode == MODE_PLANAR:
        xs = np.arange(n)
        ys = np.arange(n)
        tr = int(top[-1])
        bl = int(left[-1])
        horiz = (n - 1 - xs)[None, :] * left[:, None] + (xs + 1)[None, :] * tr
        vert = (n - 1 - ys)[:, None] * top[None, :] + (ys + 1)[:, None] * bl
        return (horiz + vert + n) // (2 * n)
    axis, d = _ANGULAR[mode]
    if axis == "top":
        ext = _ref_line(top, left, corner, n)
        off = ((np.arange(n) + 1) * d + 16) // 32
        idx = np.arange(n)[None, :] + off[:, None]
    else:
        ext = _ref_line(left, top, corner, n)
        off = ((np.arange(n) + 1) * d + 16) // 32
        idx = np.arange(n)[:, None] + off[None, :]
    return ext[np.clip(idx + n + 1, 0, 3 * n)]


def predict_block(recon: np.ndarray, grid: BlockGrid, idx: int, ctx: int,
                  mode: int) -> np.ndarray:
    """Prediction for one block under a context and mode; uint8 output.

    References come from the (quantized) reconstructions of the neighbor
    blocks so encoder and decoder stay consistent.
    """
    n = grid.block_size
    top, left, corner = canonical_refs(recon, grid, idx, ctx)
    pred = predict_canonical(mode, top, left, corner, n)
    _, inv = _CTX_TRANSFORM[ctx]
    return np.clip(inv(pred), 0, 255).astype(np.uint8)


def select_mode(original: np.ndarray, recon: np.ndarray, grid: BlockGrid,
                idx: int, ctx: int):
    """Pick the SSE-minimizing mode for a (block, context); ties take the
    lowest mode id.  Returns (mode, prediction)."""
    target = grid.get_block(original, idx).astype(np.int64)
    best = None
    for mode in range(N_MODES):
        pred = predict_block(recon, grid, idx, ctx, mode)
        sse = int(((target - pred.astype(np.int64)) ** 2).sum())
        if best is None or sse < best[0]:
            best = (sse, mode, pred)
    return best[1], best[2]
