"""Deterministic synthetic equirectangular images and head-motion traces.

Desk-scale stand-ins for large panorama datasets: latitude-banded luminance
with smooth objects and horizontally-smeared texture (natural 360-degree
content correlates more strongly along rows than columns), plus seeded
random-walk gaze traces sampled at 200 ms.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .geom import Direction, PlaneImage, wrap_longitude

TRACE_FIELDS = ("user_id", "t_ms", "longitude_rad", "latitude_rad")
TRACE_STEP_MS = 200


def synthetic_equirect(width: int = 512, height: int = 256,
                       seed: int = 7) -> PlaneImage:
    rng = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:height, 0:width]
    lat = math.pi / 2 - (ys + 0.5) / height * math.pi
    lon = (xs + 0.5) / width * 2 * math.pi - math.pi

    # Sky-to-ground latitude ramp with a soft horizon band.
    img = 140.0 + 85.0 * np.sin(lat) - 35.0 / (1.0 + np.exp(14.0 * lat))
    # Gentle large-scale scenery along longitude.
    img += 9.0 * np.sin(lon + 0.7) * np.cos(lat) ** 2
    img += 6.0 * np.sin(2 * lon - 1.9) * np.cos(3 * lat)

    # Wide, flat blobs: strong vertical edges, mild horizontal ones.
    for _ in range(7):
        blon = rng.uniform(-math.pi, math.pi)
        blat = rng.uniform(-0.65, 0.65)
        amp = rng.uniform(-40.0, 40.0)
        s_lon = rng.uniform(0.5, 1.1)
        s_lat = rng.uniform(0.06, 0.16)
        dlon = wrap_longitude(lon - blon)
        img += amp * np.exp(-(dlon / s_lon) ** 2 - ((lat - blat) / s_lat) ** 2)

    # Texture smeared horizontally: rows stay predictable from the left or
    # right while consecutive rows decorrelate quickly.
    noise = rng.normal(0.0, 10.0, (height, width))
    taps = 17
    kernel = np.ones(taps) / taps
    half = taps // 2
    pad = np.concatenate([noise[:, -half:], noise, noise[:, :half]], axis=1)
    smeared = np.empty_like(noise)
    for r in range(height):
        smeared[r] = np.convolve(pad[r], kernel, mode="valid")
    img += 3.0 * smeared
    return PlaneImage(np.clip(np.rint(img), 0, 255).astype(np.uint8))


def smooth_gradient(width: int = 2048, height: int = 1024) -> PlaneImage:
    """Slowly varying image (max slope well under 1 LSB/pixel)."""
    ys, xs = np.mgrid[0:height, 0:width]
    img = 90.0 + 0.12 * ys + 40.0 * np.sin(2 * math.pi * xs / width)
    return PlaneImage(np.clip(np.rint(img), 0, 255).astype(np.uint8))


def synthetic_trace(n_users: int = 3, n_requests: int = 10,
                    seed: int = 11) -> list:
    """Gaze random walks near the equator; rows (user_id, t_ms, lon, lat)."""
    rng = np.random.default_rng(seed)
    rows = []
    for user in range(n_users):
        lon = rng.uniform(-math.pi, math.pi)
        lat = rng.uniform(-0.25, 0.25)
        v_lon = rng.uniform(0.10, 0.22) * (1 if rng.random() < 0.7 else -1)
        v_lat = rng.uniform(-0.03, 0.03)
        for t in range(n_requests):
            rows.append((user, t * TRACE_STEP_MS, wrap_longitude(lon),
                         float(np.clip(lat, -math.pi / 2, math.pi / 2))))
            v_lon += rng.normal(0.0, 0.03)
            v_lat += rng.normal(0.0, 0.015)
            v_lon = float(np.clip(v_lon, -0.3, 0.3))
            v_lat = float(np.clip(v_lat, -0.08, 0.08))
            lon = wrap_longitude(lon + v_lon)
            lat = float(np.clip(lat + v_lat, -0.9, 0.9))
    return rows


COMPACT_FOV_DEG = 26.0


def compact_view_trace(n_requests: int = 8, seed: int = 23) -> list:
    """Short sessions with small head motion and compact viewports.

    Mirrors the short-query regime of viewport-streaming comparisons: each
    user hovers around a seam of the coarse 2x2 tiling (longitude 0 or 180
    degrees) at mid latitude, so coarse tiles always pay for two tiles while
    the footprint itself stays a few blocks wide.  Pair with a matching
    encode-time field of view (COMPACT_FOV_DEG).
    """
    rng = np.random.default_rng(seed)
    anchors = [(-9.0, 20.0), (-6.0, -20.0), (-3.0, 22.0), (0.0, -18.0)]
    rows = []
    for user, (lon_c, lat_c) in enumerate(anchors):
        # wander in unwrapped coordinates; wrap only when emitting
        lon = math.radians(lon_c + rng.uniform(-2, 2))
        lat = math.radians(lat_c + rng.uniform(-1, 1))
        for t in range(n_requests):
            rows.append((user, t * TRACE_STEP_MS, wrap_longitude(lon),
                         float(lat)))
            lon += math.radians(rng.uniform(-2.0, 2.0))
            lon = min(max(lon, math.radians(lon_c - 4)),
                      math.radians(lon_c + 4))
            lat += math.radians(rng.uniform(-1.0, 1.0))
            lat = min(max(lat, math.radians(lat_c - 2)),
                      math.radians(lat_c + 2))
    return rows


def write_trace(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_FIELDS)
        for user, t_ms, lon, lat in rows:
            writer.writerow([user, t_ms, f"{lon:.9f}", f"{lat:.9f}"])


def first_directions(rows):
    """First gaze direction of each user in a trace row list."""
    seen = {}
    for user, _, lon, lat in rows:
        if user not in seen:
            seen[user] = Direction(lon, lat)
    return seen
