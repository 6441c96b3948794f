"""Block transform, quantization and bitplane decomposition.

The same pipeline is applied to source blocks and to their predictions, so
encoder and decoder reconstructions are bit-identical functions of the
quantized levels alone and quantization error never propagates along
prediction chains.

The 2D DCT-II is orthonormal and evaluated in int64 fixed point (matrix
entries scaled by 2**13) with a single defined rounding per stage, which
makes it exactly reproducible across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_FP_BITS = 17
_FP_ONE = 1 << _FP_BITS

_matrix_cache: dict = {}


def _dct_matrix_int(n: int) -> np.ndarray:
    m = _matrix_cache.get(n)
    if m is None:
        k = np.arange(n)
        basis = np.cos(math.pi * (2 * k[None, :] + 1) * k[:, None] / (2 * n))
        basis *= math.sqrt(2.0 / n)
        basis[0, :] = math.sqrt(1.0 / n)
        m = np.rint(basis * _FP_ONE).astype(np.int64)
        _matrix_cache[n] = m
    return m


def _round_half_away_int(v: np.ndarray, shift: int) -> np.ndarray:
    half = 1 << (shift - 1)
    mag = (np.abs(v) + half) >> shift
    return np.where(v < 0, -mag, mag)


def forward_transform(block: np.ndarray) -> np.ndarray:
    """Orthonormal 2D DCT-II of a square pixel block.

    Returns float64 coefficients that are exact dyadic rationals (int64
    accumulation divided by a power of two), hence deterministic.
    """
    n = block.shape[0]
    m = _dct_matrix_int(n)
    acc = m @ block.astype(np.int64) @ m.T
    return acc / float(1 << (2 * _FP_BITS))


def inverse_transform(coeffs: np.ndarray) -> np.ndarray:
    """Inverse DCT back to uint8 pixels (rounded, clamped to [0, 255]).

    The first stage is rescaled before the second matrix product to keep
    the int64 accumulators in range at this fixed-point precision.
    """
    n = coeffs.shape[0]
    m = _dct_matrix_int(n)
    c_int = np.rint(coeffs * _FP_ONE).astype(np.int64)
    stage = _round_half_away_int(m.T @ c_int, _FP_BITS)
    pix = _round_half_away_int(stage @ m, 2 * _FP_BITS)
    return np.clip(pix, 0, 255).astype(np.uint8)


def quant_step(qp: int) -> float:
    if not 0 <= qp <= 51:
        raise ValueError(f"qp {qp} outside [0, 51]")
    return 2.0 ** ((qp - 4) / 6.0)


def quantize(coeffs: np.ndarray, qp: int) -> np.ndarray:
    """Uniform quantizer, round half away from zero; int32 levels."""
    step = quant_step(qp)
    levels = np.sign(coeffs) * np.floor(np.abs(coeffs) / step + 0.5)
    return levels.astype(np.int32)


def dequantize(levels: np.ndarray, qp: int) -> np.ndarray:
    return levels.astype(np.float64) * quant_step(qp)


def reconstruct(levels: np.ndarray, qp: int) -> np.ndarray:
    """Decoder-side reconstruction; depends on the levels only."""
    return inverse_transform(dequantize(levels, qp))


def plane_count_for(max_abs_level: int) -> int:
    """Shared plane count: sign plane plus magnitude planes sized for the
    largest level magnitude in the image at this qp."""
    bits = max(1, int(max_abs_level).bit_length())
    return 1 + bits


@dataclass
class BitplaneSet:
    """Sign/magnitude bitplanes of a level block, MSB magnitude first.

    planes[p] for p < P-1 holds magnitude bit (P-2-p); planes[P-1] is the
    sign plane (1 for negative).  Flattened row-major, uint8 in {0, 1}.
    """

    planes: np.ndarray  # shape (P, n)

    @property
    def n_planes(self) -> int:
        return self.planes.shape[0]


def bitplane_split(levels: np.ndarray, n_planes: int) -> BitplaneSet:
    flat = levels.astype(np.int64).ravel()
    mag = np.abs(flat)
    n_mag = n_planes - 1
    limit = (1 << n_mag) - 1
    mag = np.minimum(mag, limit)  # SI magnitudes may exceed the shared range
    planes = np.empty((n_planes, flat.size), dtype=np.uint8)
    for p in range(n_mag):
        planes[p] = (mag >> (n_mag - 1 - p)) & 1
    planes[n_mag] = (flat < 0).astype(np.uint8)
    return BitplaneSet(planes)


def bitplane_join(bp: BitplaneSet, shape) -> np.ndarray:
    n_mag = bp.n_planes - 1
    mag = np.zeros(bp.planes.shape[1], dtype=np.int64)
    for p in range(n_mag):
        mag = (mag << 1) | bp.planes[p]
    sign = np.where(bp.planes[n_mag] > 0, -1, 1)
    return (sign * mag).reshape(shape).astype(np.int32)
