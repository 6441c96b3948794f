"""Sphere/plane geometry: equirectangular mapping, viewport rendering, metrics.

Conventions: longitude in [-pi, pi) increases eastward and wraps, latitude in
[-pi/2, pi/2] increases northward.  Continuous pixel coordinates are
edge-based: longitude -pi maps to x=0, latitude +pi/2 maps to y=0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image

TWO_PI = 2.0 * math.pi

# BT.601 luma weights for color inputs.
_LUMA = np.array([0.299, 0.587, 0.114])

PSNR_INFINITE = math.inf


@dataclass(frozen=True)
class Direction:
    """Gaze direction on the sphere (radians)."""

    longitude: float
    latitude: float

    def __post_init__(self):
        lon = wrap_longitude(self.longitude)
        object.__setattr__(self, "longitude", lon)
        if not -math.pi / 2 <= self.latitude <= math.pi / 2:
            raise ValueError(f"latitude {self.latitude} outside [-pi/2, pi/2]")


@dataclass(frozen=True)
class ViewportSpec:
    """Viewport request: gaze direction, field of view and raster size."""

    direction: Direction
    fov_h: float = math.pi / 2
    fov_v: float = math.pi / 2
    vp_width: int = 256
    vp_height: int = 256

    def __post_init__(self):
        if self.vp_width < 1 or self.vp_height < 1:
            raise ValueError("viewport raster must be at least 1x1")
        if self.fov_h <= 0 or self.fov_v <= 0:
            raise ValueError("fov must be positive")


class PlaneImage:
    """Equirectangular 2D image; luma-only uint8 samples internally.

    Color inputs are converted with BT.601 weights at load time; the codec
    operates on luma only.
    """

    def __init__(self, samples: np.ndarray):
        samples = np.asarray(samples)
        if samples.ndim == 3:
            samples = np.rint(samples.astype(np.float64) @ _LUMA)
        if samples.ndim != 2:
            raise ValueError("expected a 2D (or HxWx3) sample array")
        self.samples = np.clip(samples, 0, 255).astype(np.uint8)
        self.height, self.width = self.samples.shape

    @classmethod
    def load(cls, path) -> "PlaneImage":
        img = Image.open(path)
        if img.mode not in ("L", "RGB"):
            img = img.convert("RGB")
        arr = np.asarray(img)
        if arr.shape[1] != 2 * arr.shape[0]:
            raise ValueError(
                f"equirectangular input must be 2:1, got {arr.shape[1]}x{arr.shape[0]}"
            )
        return cls(arr)

    def save(self, path):
        Image.fromarray(self.samples, mode="L").save(path)


def wrap_longitude(lon):
    """Wrap to [-pi, pi); works on scalars and arrays."""
    return (lon + math.pi) % TWO_PI - math.pi


def sphere_to_pixel(d: Direction, w: int, h: int):
    """Continuous pixel coordinates of a direction; x wraps modulo w."""
    x = (wrap_longitude(d.longitude) + math.pi) / TWO_PI * w
    y = (math.pi / 2 - d.latitude) / math.pi * h
    return x % w, y


def pixel_to_sphere(x, y, w: int, h: int) -> Direction:
    """Inverse of sphere_to_pixel for in-range pixel coordinates."""
    lon = x / w * TWO_PI - math.pi
    lat = math.pi / 2 - y / h * math.pi
    return Direction(lon, lat)


def _camera_basis(d: Direction):
    """Orthonormal (forward, east, north) triple for a gaze direction."""
    cl, sl = math.cos(d.longitude), math.sin(d.longitude)
    ct, st = math.cos(d.latitude), math.sin(d.latitude)
    forward = np.array([ct * cl, ct * sl, st])
    east = np.array([-sl, cl, 0.0])
    north = np.array([-st * cl, -st * sl, ct])
    return forward, east, north


def viewport_rays(spec: ViewportSpec) -> np.ndarray:
    """Unit ray per viewport pixel center, shape (vp_h, vp_w, 3).

    Rectilinear (gnomonic) camera: the viewport raster samples the plane
    tangent to the sphere at the gaze direction.
    """
    if spec.fov_h >= math.pi or spec.fov_v >= math.pi:
        raise ValueError("rectilinear projection requires fov < pi")
    w, h = spec.vp_width, spec.vp_height
    tan_u = math.tan(spec.fov_h / 2)
    tan_v = math.tan(spec.fov_v / 2)
    us = tan_u * (2.0 * (np.arange(w) + 0.5) / w - 1.0)
    vs = tan_v * (1.0 - 2.0 * (np.arange(h) + 0.5) / h)
    uu, vv = np.meshgrid(us, vs)
    forward, east, north = _camera_basis(spec.direction)
    rays = forward + uu[..., None] * east + vv[..., None] * north
    return rays / np.linalg.norm(rays, axis=-1, keepdims=True)


def rays_to_pixels(rays: np.ndarray, w: int, h: int):
    """Continuous equirectangular coordinates of unit rays."""
    lon = np.arctan2(rays[..., 1], rays[..., 0])
    lat = np.arcsin(np.clip(rays[..., 2], -1.0, 1.0))
    x = (lon + math.pi) / TWO_PI * w % w
    y = (math.pi / 2 - lat) / math.pi * h
    return x, y


def _bilinear_taps(x, y, w: int, h: int):
    """Integer tap coordinates and weights for bilinear sampling.

    Sampling is pixel-center based (continuous coordinate x sits at pixel
    x - 0.5), wrapping horizontally and clamping vertically.
    """
    xs = x - 0.5
    ys = np.clip(y - 0.5, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    fx = xs - x0
    fy = ys - y0
    x0 %= w
    x1 = (x0 + 1) % w
    y1 = np.minimum(y0 + 1, h - 1)
    return (x0, x1, y0, y1), (fx, fy)


def render_viewport(img: PlaneImage, spec: ViewportSpec) -> np.ndarray:
    """Render the viewport with bilinear sampling; returns uint8 (vp_h, vp_w)."""
    x, y = rays_to_pixels(viewport_rays(spec), img.width, img.height)
    (x0, x1, y0, y1), (fx, fy) = _bilinear_taps(x, y, img.width, img.height)
    s = img.samples.astype(np.float64)
    top = s[y0, x0] * (1 - fx) + s[y0, x1] * fx
    bot = s[y1, x0] * (1 - fx) + s[y1, x1] * fx
    out = top * (1 - fy) + bot * fy
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def footprint_pixels(spec: ViewportSpec, w: int, h: int):
    """Unique (y, x) source pixels touched by the viewport's bilinear taps."""
    x, y = rays_to_pixels(viewport_rays(spec), w, h)
    (x0, x1, y0, y1), _ = _bilinear_taps(x, y, w, h)
    xs = np.concatenate([x0.ravel(), x1.ravel(), x0.ravel(), x1.ravel()])
    ys = np.concatenate([y0.ravel(), y0.ravel(), y1.ravel(), y1.ravel()])
    flat = np.unique(ys * w + xs)
    return flat // w, flat % w


def viewport_footprint(spec: ViewportSpec, w: int, h: int, block_size: int) -> set:
    """Block indices (row-major) whose pixels the viewport samples.

    A fov of pi or more is treated as a full-sphere request and returns
    every block.
    """
    if w % block_size or h % block_size:
        raise ValueError("block_size must divide both image dimensions")
    cols = w // block_size
    rows = h // block_size
    if spec.fov_h >= math.pi or spec.fov_v >= math.pi:
        return set(range(rows * cols))
    py, px = footprint_pixels(spec, w, h)
    blocks = (py // block_size) * cols + px // block_size
    return set(int(b) for b in np.unique(blocks))


def viewport_psnr(v: np.ndarray, v_hat: np.ndarray) -> float:
    """Luma PSNR (peak 255) between two rendered viewports."""
    v = np.asarray(v)
    v_hat = np.asarray(v_hat)
    if v.shape != v_hat.shape:
        raise ValueError(f"viewport shapes differ: {v.shape} vs {v_hat.shape}")
    if v.ndim == 3:
        v = v.astype(np.float64) @ _LUMA
        v_hat = v_hat.astype(np.float64) @ _LUMA
    mse = np.mean((v.astype(np.float64) - v_hat.astype(np.float64)) ** 2)
    if mse == 0.0:
        return PSNR_INFINITE
    return 10.0 * math.log10(255.0**2 / mse)


def usefulness(displayed_px: int, decoded_px: int) -> float:
    """Fraction of decoded pixels that were actually displayed."""
    if decoded_px <= 0:
        raise ValueError("decoded pixel count must be positive")
    if displayed_px > decoded_px:
        raise ValueError("displayed pixels cannot exceed decoded pixels")
    return displayed_px / decoded_px
