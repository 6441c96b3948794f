import math

import numpy as np
import pytest

from oic360 import fixtures, geom
from oic360.geom import (
    Direction,
    PlaneImage,
    ViewportSpec,
    pixel_to_sphere,
    render_viewport,
    sphere_to_pixel,
    usefulness,
    viewport_footprint,
    viewport_psnr,
)


def test_sphere_to_pixel_center():
    assert sphere_to_pixel(Direction(0.0, 0.0), 512, 256) == (256.0, 128.0)


def test_sphere_to_pixel_top_left():
    assert sphere_to_pixel(Direction(-math.pi, math.pi / 2), 512, 256) == (0.0, 0.0)


def test_sphere_to_pixel_wrap():
    x, y = sphere_to_pixel(Direction(math.pi - 1e-9, 0.0), 512, 256)
    assert 511.9 < x < 512.0 and y == 128.0
    x_wrap, _ = sphere_to_pixel(Direction(math.pi, 0.0), 512, 256)
    assert x_wrap == 0.0


def test_pixel_sphere_inverse():
    rng = np.random.default_rng(5)
    for _ in range(500):
        x = rng.uniform(0, 512)
        y = rng.uniform(0, 256)
        d = pixel_to_sphere(x, y, 512, 256)
        x2, y2 = sphere_to_pixel(d, 512, 256)
        assert abs(x2 - x) < 1e-9 * 512 or abs(abs(x2 - x) - 512) < 1e-6
        assert abs(y2 - y) < 1e-9 * 256


def _oracle_footprint(spec: ViewportSpec, w: int, h: int, block_size: int):
    """Per-pixel independent double-precision projection, 4 bilinear taps."""
    cols = w // block_size
    lon0, lat0 = spec.direction.longitude, spec.direction.latitude
    f = (math.cos(lat0) * math.cos(lon0), math.cos(lat0) * math.sin(lon0),
         math.sin(lat0))
    e = (-math.sin(lon0), math.cos(lon0), 0.0)
    nv = (-math.sin(lat0) * math.cos(lon0), -math.sin(lat0) * math.sin(lon0),
          math.cos(lat0))
    tu = math.tan(spec.fov_h / 2)
    tv = math.tan(spec.fov_v / 2)
    blocks = set()
    for j in range(spec.vp_height):
        v = tv * (1.0 - 2.0 * (j + 0.5) / spec.vp_height)
        for i in range(spec.vp_width):
            u = tu * (2.0 * (i + 0.5) / spec.vp_width - 1.0)
            rx = f[0] + u * e[0] + v * nv[0]
            ry = f[1] + u * e[1] + v * nv[1]
            rz = f[2] + u * e[2] + v * nv[2]
            norm = math.sqrt(rx * rx + ry * ry + rz * rz)
            lon = math.atan2(ry, rx)
            lat = math.asin(max(-1.0, min(1.0, rz / norm)))
            px = (lon + math.pi) / (2 * math.pi) * w % w
            py = (math.pi / 2 - lat) / math.pi * h
            xs = px - 0.5
            ys = min(max(py - 0.5, 0.0), h - 1.0)
            x0 = int(math.floor(xs))
            y0 = int(math.floor(ys))
            for xx, yy in ((x0, y0), (x0 + 1, y0), (x0, y0 + 1),
                           (x0 + 1, y0 + 1)):
                xx %= w
                yy = min(yy, h - 1)
                blocks.add((yy // block_size) * cols + xx // block_size)
    return blocks


def test_footprint_full_sphere_degenerate():
    spec = ViewportSpec(Direction(0, 0), fov_h=2 * math.pi, fov_v=2 * math.pi)
    assert viewport_footprint(spec, 512, 256, 32) == set(range(128))


def test_footprint_tiny_fov_equator():
    spec = ViewportSpec(Direction(0.3, 0.0), fov_h=0.02, fov_v=0.02,
                        vp_width=16, vp_height=16)
    got = viewport_footprint(spec, 512, 256, 32)
    assert got == _oracle_footprint(spec, 512, 256, 32)
    assert 1 <= len(got) <= 4


def test_footprint_near_pole_spans_top_row():
    spec = ViewportSpec(Direction(0.0, math.radians(88)), vp_width=64,
                        vp_height=64)
    got = viewport_footprint(spec, 512, 256, 32)
    assert {b for b in got if b < 16} == set(range(16))


def test_footprint_matches_oracle():
    rng = np.random.default_rng(11)
    for _ in range(6):
        spec = ViewportSpec(
            Direction(rng.uniform(-math.pi, math.pi), rng.uniform(-1.2, 1.2)),
            fov_h=rng.uniform(0.3, 1.8), fov_v=rng.uniform(0.3, 1.8),
            vp_width=48, vp_height=48)
        assert viewport_footprint(spec, 512, 256, 32) == \
            _oracle_footprint(spec, 512, 256, 32)


def test_footprint_longitude_shift_invariance():
    cols = 16
    block_width = 2 * math.pi / cols
    base = ViewportSpec(Direction(0.1234, 0.0), vp_width=64, vp_height=64)
    ref = viewport_footprint(base, 512, 256, 32)
    for k in (1, 5, 9):
        shifted = ViewportSpec(Direction(0.1234 + k * block_width, 0.0),
                               vp_width=64, vp_height=64)
        got = viewport_footprint(shifted, 512, 256, 32)
        expect = {(b // cols) * cols + (b + k) % cols for b in ref}
        assert got == expect


def test_render_constant_image():
    img = PlaneImage(np.full((256, 512), 77, dtype=np.uint8))
    vp = render_viewport(img, ViewportSpec(Direction(1.0, 0.3)))
    assert (vp == 77).all()


def test_render_deterministic(fimg):
    spec = ViewportSpec(Direction(0.4, -0.2))
    assert np.array_equal(render_viewport(fimg, spec),
                          render_viewport(fimg, spec))


def test_render_matches_nearest_neighbor_on_smooth_image():
    img = fixtures.smooth_gradient()
    spec = ViewportSpec(Direction(0.8, 0.1), fov_h=0.35, fov_v=0.35,
                        vp_width=32, vp_height=32)
    vp = render_viewport(img, spec)
    # independent per-pixel double-precision nearest-neighbor reference
    lon0, lat0 = spec.direction.longitude, spec.direction.latitude
    f = (math.cos(lat0) * math.cos(lon0), math.cos(lat0) * math.sin(lon0),
         math.sin(lat0))
    e = (-math.sin(lon0), math.cos(lon0), 0.0)
    nv = (-math.sin(lat0) * math.cos(lon0), -math.sin(lat0) * math.sin(lon0),
          math.cos(lat0))
    tu, tv = math.tan(spec.fov_h / 2), math.tan(spec.fov_v / 2)
    for j in range(spec.vp_height):
        v = tv * (1.0 - 2.0 * (j + 0.5) / spec.vp_height)
        for i in range(spec.vp_width):
            u = tu * (2.0 * (i + 0.5) / spec.vp_width - 1.0)
            rx = f[0] + u * e[0] + v * nv[0]
            ry = f[1] + u * e[1] + v * nv[1]
            rz = f[2] + u * e[2] + v * nv[2]
            norm = math.sqrt(rx * rx + ry * ry + rz * rz)
            lon = math.atan2(ry, rx)
            lat = math.asin(rz / norm)
            px = (lon + math.pi) / (2 * math.pi) * img.width % img.width
            py = (math.pi / 2 - lat) / math.pi * img.height
            nearest = img.samples[min(int(py), img.height - 1),
                                  int(px) % img.width]
            assert abs(int(vp[j, i]) - int(nearest)) <= 1


def test_psnr_identical_is_infinite():
    v = np.zeros((8, 8), dtype=np.uint8)
    assert viewport_psnr(v, v) == geom.PSNR_INFINITE


def test_psnr_uniform_difference():
    a = np.full((16, 16), 100, dtype=np.uint8)
    b = np.full((16, 16), 116, dtype=np.uint8)
    assert viewport_psnr(a, b) == pytest.approx(10 * math.log10(255**2 / 256))


def test_psnr_single_pixel():
    n = 64 * 64
    a = np.zeros((64, 64), dtype=np.uint8)
    b = a.copy()
    b[10, 20] = 255
    assert viewport_psnr(a, b) == pytest.approx(10 * math.log10(n))


def test_psnr_shape_mismatch():
    with pytest.raises(ValueError):
        viewport_psnr(np.zeros((4, 4)), np.zeros((4, 5)))


def test_usefulness_values():
    assert usefulness(100, 100) == 1.0
    assert usefulness(100, 400) == 0.25
    with pytest.raises(ValueError):
        usefulness(10, 0)
    with pytest.raises(ValueError):
        usefulness(11, 10)


def test_usefulness_monotone_in_decoded():
    vals = [usefulness(500, d) for d in range(500, 5000, 250)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert all(0 < v <= 1 for v in vals)
