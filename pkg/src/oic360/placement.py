"""Access-block placement: sphere-sweep greedy cover and verification.

Placement and the coverage check both project a reduced viewport lattice
(up to 33x33 ray samples) instead of every viewport pixel.  The reduced
footprint is a subset of the full one, so a set that passes the check also
satisfies the constraint for the full-resolution footprints used by the
simulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blocks import BlockGrid
from .geom import Direction, ViewportSpec, sphere_to_pixel, viewport_rays

COVERAGE_RASTER = 33

STRATEGY_FIXED = "fixed"
STRATEGY_CONTENT = "content"


@dataclass
class AccessBlockSet:
    """Blocks decodable with no prior neighbor, plus signaling accounting."""

    blocks: tuple
    strategy: str
    grid_blocks: int

    @property
    def signaling_bits(self) -> int:
        if self.strategy == STRATEGY_FIXED:
            return 0
        addr = max(1, math.ceil(math.log2(self.grid_blocks)))
        return (1 + len(self.blocks)) * addr

    def __contains__(self, idx):
        return idx in self.blocks


def _reduced_spec(spec: ViewportSpec, direction: Direction) -> ViewportSpec:
    return ViewportSpec(
        direction=direction,
        fov_h=spec.fov_h, fov_v=spec.fov_v,
        vp_width=min(spec.vp_width, COVERAGE_RASTER),
        vp_height=min(spec.vp_height, COVERAGE_RASTER),
    )


def coverage_blocks(grid: BlockGrid, spec: ViewportSpec,
                    direction: Direction) -> np.ndarray:
    """Block ids under the reduced viewport lattice for one direction.

    A fov of pi or more degenerates to the whole sphere.
    """
    if spec.fov_h >= math.pi or spec.fov_v >= math.pi:
        return np.arange(grid.n_blocks, dtype=np.int64)
    rays = viewport_rays(_reduced_spec(spec, direction)).reshape(-1, 3)
    return _blocks_of_rays(grid, rays)


def _blocks_of_rays(grid: BlockGrid, rays: np.ndarray) -> np.ndarray:
    lon = np.arctan2(rays[..., 1], rays[..., 0])
    lat = np.arcsin(np.clip(rays[..., 2], -1.0, 1.0))
    x = ((lon + math.pi) / (2 * math.pi) * grid.width) % grid.width
    y = (math.pi / 2 - lat) / math.pi * grid.height
    col = np.minimum(x.astype(np.int64), grid.width - 1) // grid.block_size
    row = np.minimum(y.astype(np.int64), grid.height - 1) // grid.block_size
    return np.unique(row * grid.cols + col)


def sweep_directions(d_lon: float, d_lat: float):
    """North-to-south latitude rows, west-to-east within each row, matching
    the placement sweep (latitude loop runs ascending from the south pole)."""
    out = []
    lat = -math.pi / 2
    while lat <= math.pi / 2 + 1e-12:
        lon = -math.pi
        while lon < math.pi - 1e-12:
            out.append(Direction(lon, min(lat, math.pi / 2)))
            lon += d_lon
        lat += d_lat
    return out


def _validate_steps(spec: ViewportSpec, d_lon: float, d_lat: float):
    if d_lon <= 0 or d_lat <= 0:
        raise ValueError("sweep steps must be positive")
    if d_lon > spec.fov_h / 2 or d_lat > spec.fov_v / 2:
        raise ValueError("sweep step too coarse to guarantee coverage")


def center_block(grid: BlockGrid, direction: Direction) -> int:
    x, y = sphere_to_pixel(direction, grid.width, grid.height)
    return grid.block_of_pixel(x, y)


_fixed_cache: dict = {}


def place_fixed(grid: BlockGrid, spec: ViewportSpec,
                d_lon: float | None = None,
                d_lat: float | None = None) -> AccessBlockSet:
    """Greedy sweep: whenever a direction sees no access block yet, the block
    under the viewport center becomes one.  Content independent, so the
    result is identical for all images of the same resolution (and cached
    per resolution/fov/step)."""
    d_lon = spec.fov_h / 8 if d_lon is None else d_lon
    d_lat = spec.fov_v / 8 if d_lat is None else d_lat
    _validate_steps(spec, d_lon, d_lat)
    key = (grid.width, grid.height, grid.block_size, spec.fov_h, spec.fov_v,
           min(spec.vp_width, COVERAGE_RASTER),
           min(spec.vp_height, COVERAGE_RASTER), d_lon, d_lat)
    if key in _fixed_cache:
        return _fixed_cache[key]
    chosen: list = []
    for direction in sweep_directions(d_lon, d_lat):
        visible = coverage_blocks(grid, spec, direction)
        if not any(b in visible for b in chosen):
            chosen.append(center_block(grid, direction))
    out = AccessBlockSet(tuple(sorted(set(chosen))), STRATEGY_FIXED,
                         grid.n_blocks)
    _fixed_cache[key] = out
    return out


def place_content(grid: BlockGrid, independent_rates, spec: ViewportSpec,
                  d_lon: float | None = None,
                  d_lat: float | None = None) -> AccessBlockSet:
    """Content-aware sweep: uncovered directions pick the cheapest visible
    block (ties go to the block closest to the viewport center, then to the
    lowest index).  The positions must then be signaled to the decoder."""
    d_lon = spec.fov_h / 8 if d_lon is None else d_lon
    d_lat = spec.fov_v / 8 if d_lat is None else d_lat
    _validate_steps(spec, d_lon, d_lat)
    rates = np.asarray(independent_rates, dtype=np.float64)
    if rates.shape[0] != grid.n_blocks:
        raise ValueError("need an independent rate per block")
    chosen: list = []
    for direction in sweep_directions(d_lon, d_lat):
        visible = coverage_blocks(grid, spec, direction)
        if any(b in visible for b in chosen):
            continue
        cx, cy = sphere_to_pixel(direction, grid.width, grid.height)
        best = None
        for b in visible:
            r, c = grid.row_col(int(b))
            bx = (c + 0.5) * grid.block_size
            by = (r + 0.5) * grid.block_size
            dx = abs(bx - cx)
            dx = min(dx, grid.width - dx)
            dist = math.hypot(dx, by - cy)
            key = (float(rates[b]), dist, int(b))
            if best is None or key < best:
                best = key
        chosen.append(best[2])
    acc = AccessBlockSet(tuple(sorted(set(chosen))), STRATEGY_CONTENT,
                         grid.n_blocks)
    return acc


def content_total_cost(acc: AccessBlockSet, independent_rates) -> float:
    """Signaling plus independent coding cost of a content-based set."""
    rates = np.asarray(independent_rates, dtype=np.float64)
    return acc.signaling_bits + float(sum(rates[b] for b in acc.blocks))


def check_constraint(access, grid: BlockGrid, spec: ViewportSpec,
                     d_lon: float, d_lat: float, chunk: int = 2048):
    """Exhaustively verify that every direction on the lattice sees an access
    block.  Returns (True, None) or (False, first violating direction)."""
    blocks = np.asarray(sorted(set(
        access.blocks if isinstance(access, AccessBlockSet) else access)),
        dtype=np.int64)
    dirs = sweep_directions(d_lon, d_lat)
    if spec.fov_h >= math.pi or spec.fov_v >= math.pi:
        return (True, None) if blocks.size else (False, dirs[0])
    vp = _reduced_spec(spec, dirs[0])
    w, h = vp.vp_width, vp.vp_height
    tan_u = math.tan(spec.fov_h / 2)
    tan_v = math.tan(spec.fov_v / 2)
    us = tan_u * (2.0 * (np.arange(w) + 0.5) / w - 1.0)
    vs = tan_v * (1.0 - 2.0 * (np.arange(h) + 0.5) / h)
    uu, vv = np.meshgrid(us, vs)
    uu, vv = uu.ravel(), vv.ravel()
    if blocks.size == 0:
        return False, dirs[0]
    for lo in range(0, len(dirs), chunk):
        batch = dirs[lo:lo + chunk]
        lons = np.array([d.longitude for d in batch])
        lats = np.array([d.latitude for d in batch])
        cl, sl = np.cos(lons), np.sin(lons)
        ct, st = np.cos(lats), np.sin(lats)
        fwd = np.stack([ct * cl, ct * sl, st], axis=1)
        east = np.stack([-sl, cl, np.zeros_like(sl)], axis=1)
        north = np.stack([-st * cl, -st * sl, ct], axis=1)
        rays = (fwd[:, None, :] + uu[None, :, None] * east[:, None, :]
                + vv[None, :, None] * north[:, None, :])
        lon = np.arctan2(rays[..., 1], rays[..., 0])
        lat = np.arcsin(np.clip(rays[..., 2] / np.linalg.norm(rays, axis=-1),
                                -1.0, 1.0))
        x = ((lon + math.pi) / (2 * math.pi) * grid.width) % grid.width
        y = (math.pi / 2 - lat) / math.pi * grid.height
        col = np.minimum(x.astype(np.int64), grid.width - 1) // grid.block_size
        row = np.minimum(y.astype(np.int64), grid.height - 1) // grid.block_size
        ids = row * grid.cols + col
        hit = np.isin(ids, blocks).any(axis=1)
        if not hit.all():
            return False, batch[int(np.argmin(hit))]
    return True, None
