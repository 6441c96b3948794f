"""Block decoding orders and multi-request navigation planning.

All orders obey the decodability rule: each block, when reached, is either
the request's entry point or adjacent to an already-decoded block.  The
snake scan and the neighbor-count greedy need no signaling beyond the single
preference-axis bit because the decoder reproduces them from the requested
set and the start block alone; the rate greedy needs the full permutation
signaled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .blocks import BlockGrid, available_contexts

ORDER_SNAKE = "snake"
ORDER_GREEDY_COUNT = "greedycount"
ORDER_GREEDY_RATE = "greedyrate"


@dataclass
class DecodingOrder:
    blocks: list
    algorithm: str
    prefer_horizontal: bool = True

    @property
    def signaling_bits(self) -> int:
        if not self.blocks:
            return 0
        if self.algorithm == ORDER_GREEDY_RATE:
            if len(self.blocks) < 2:
                return 0
            return math.ceil(len(self.blocks) * math.log2(len(self.blocks)))
        return 1  # preference-axis bit


@dataclass
class SessionState:
    """Per-user interactive session; the decoded set only ever grows."""

    decoded: set = field(default_factory=set)
    accumulated_bits: int = 0
    requests: int = 0


def _pref_positions(prefer_horizontal: bool):
    horizontal = ("R", "L")
    vertical = ("B", "T")
    return horizontal + vertical if prefer_horizontal else vertical + horizontal


def snake_like(grid: BlockGrid, requested, start: int,
               prefer_horizontal: bool = True) -> DecodingOrder:
    """Scan continuing horizontally while possible, else vertically, else
    backtracking to the most recently placed block with an unvisited
    neighbor.  Visits every requested block exactly once."""
    requested = set(requested)
    if start not in requested:
        raise ValueError("start block must be requested")
    positions = _pref_positions(prefer_horizontal)
    order = [start]
    visited = {start}

    def next_from(b):
        for pos in positions:
            nb = grid.neighbor(b, pos)
            if nb is not None and nb in requested and nb not in visited:
                return nb
        return None

    cur = start
    while len(visited) < len(requested):
        nxt = next_from(cur)
        if nxt is None:
            for placed in reversed(order):
                nxt = next_from(placed)
                if nxt is not None:
                    break
            if nxt is None:
                raise ValueError("requested set is disconnected")
        order.append(nxt)
        visited.add(nxt)
        cur = nxt
    return DecodingOrder(order, ORDER_SNAKE, prefer_horizontal)


def _decoded_neighbor_stats(grid: BlockGrid, b: int, decoded) -> tuple:
    count = 0
    horizontal = 0
    for pos in ("L", "R", "T", "B"):
        nb = grid.neighbor(b, pos)
        if nb is not None and nb in decoded:
            count += 1
            if pos in ("L", "R"):
                horizontal = 1
    return count, horizontal


def greedy_count(grid: BlockGrid, requested, start: int,
                 pre_decoded=frozenset()) -> DecodingOrder:
    """Frontier pick maximizing already-decoded neighbors; ties prefer a
    block with a horizontal decoded neighbor, then the lowest index."""
    requested = set(requested)
    if start not in requested:
        raise ValueError("start block must be requested")
    decoded = set(pre_decoded) | {start}
    order = [start]
    remaining = requested - {start}
    while remaining:
        best = None
        for b in remaining:
            count, horiz = _decoded_neighbor_stats(grid, b, decoded)
            if count == 0:
                continue
            key = (-count, -horiz, b)
            if best is None or key < best:
                best = key
        if best is None:
            raise ValueError("requested set is disconnected")
        pick = best[2]
        order.append(pick)
        decoded.add(pick)
        remaining.discard(pick)
    return DecodingOrder(order, ORDER_GREEDY_COUNT)


def greedy_rate(grid: BlockGrid, requested, start: int, rate_of,
                pre_decoded=frozenset()) -> DecodingOrder:
    """Frontier pick minimizing the extraction bits of the best realizable
    context.  rate_of(block, ctx) -> bits.  Content dependent, hence the
    decoding order must be signaled."""
    requested = set(requested)
    if start not in requested:
        raise ValueError("start block must be requested")
    decoded = set(pre_decoded) | {start}
    order = [start]
    remaining = requested - {start}
    while remaining:
        best = None
        for b in remaining:
            count, _ = _decoded_neighbor_stats(grid, b, decoded)
            if count == 0:
                continue
            ctx = available_contexts(grid, b, decoded)
            key = (rate_of(b, ctx), b)
            if best is None or key < best:
                best = key
        if best is None:
            raise ValueError("requested set is disconnected")
        pick = best[1]
        order.append(pick)
        decoded.add(pick)
        remaining.discard(pick)
    return DecodingOrder(order, ORDER_GREEDY_RATE)


def _component(grid: BlockGrid, seed: int, universe: set) -> set:
    comp = {seed}
    stack = [seed]
    while stack:
        b = stack.pop()
        for nb in grid.neighbors(b):
            if nb in universe and nb not in comp:
                comp.add(nb)
                stack.append(nb)
    return comp


def plan_navigation(state: SessionState, requested, access_blocks, grid: BlockGrid,
                    algorithm: str = ORDER_SNAKE, rate_of=None,
                    prefer_horizontal: bool = True):
    """Order the not-yet-decoded part of a request.

    Prefers starting at a block adjacent to the already-decoded region (no
    access cost); a disjoint request starts at an access block inside it,
    which the placement constraint guarantees to exist.  Returns (starts,
    DecodingOrder over the new blocks only).
    """
    requested = set(requested)
    todo = requested - state.decoded
    blocks: list = []
    starts: list = []
    decoded_acc = set(state.decoded)
    while todo:
        adj = sorted(b for b in todo
                     if any(nb in decoded_acc for nb in grid.neighbors(b)))
        if adj:
            start = adj[0]
        else:
            entry = sorted(b for b in todo if b in access_blocks)
            if not entry:
                raise ValueError("request has no reachable entry point")
            start = entry[0]
        if algorithm == ORDER_SNAKE:
            segment = snake_like(grid, _component(grid, start, todo), start,
                                 prefer_horizontal).blocks
        elif algorithm == ORDER_GREEDY_COUNT:
            segment = greedy_count(grid, _component(grid, start, todo), start,
                                   pre_decoded=decoded_acc).blocks
        elif algorithm == ORDER_GREEDY_RATE:
            if rate_of is None:
                raise ValueError("greedy rate ordering needs a rate table")
            segment = greedy_rate(grid, _component(grid, start, todo), start,
                                  rate_of, pre_decoded=decoded_acc).blocks
        else:
            raise ValueError(f"unknown ordering algorithm {algorithm!r}")
        starts.append(start)
        blocks.extend(segment)
        decoded_acc.update(segment)
        todo.difference_update(segment)
    return starts, DecodingOrder(blocks, algorithm, prefer_horizontal)
