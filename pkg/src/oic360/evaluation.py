"""Storage-Rate-Distortion evaluation: BD deltas, iso points, weighted costs.

Methods are compared as 3D S-R-D curves parameterized by qp.  BD deltas
project a curve onto a (distortion, cost) plane -- cost being R, S, or a
weighted combination -- fit a cubic polynomial to log10(cost) over distortion,
and integrate both fits across the common distortion range, following the
classic average-bitrate-difference convention.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

AXIS_R = "R"
AXIS_S = "S"
AXIS_WEIGHTED = "weighted"

DEFAULT_LAMBDAS = (0.1, 0.01, 1e-3)


@dataclass(frozen=True)
class SRDPoint:
    qp: int
    s_bytes: float
    r_bytes: float
    psnr_db: float


@dataclass
class SRDCurve:
    method: str
    points: list

    def __post_init__(self):
        self.points = sorted(self.points, key=lambda p: p.qp)
        qps = [p.qp for p in self.points]
        if len(set(qps)) != len(qps):
            raise ValueError("duplicate qp in curve")
        s = [p.s_bytes for p in self.points]
        d = [p.psnr_db for p in self.points]
        for a, b in zip(s, s[1:]):
            if b >= a:
                raise ValueError("storage must strictly decrease with qp")
        for a, b in zip(d, d[1:]):
            if b >= a:
                raise ValueError("distortion (PSNR) must strictly decrease with qp")

    def arrays(self):
        return (np.array([p.s_bytes for p in self.points]),
                np.array([p.r_bytes for p in self.points]),
                np.array([p.psnr_db for p in self.points]))


@dataclass
class BDResult:
    delta_pct: float
    axis: str
    lam: float | None
    alpha: float | None
    beta: float | None
    d_range: tuple


def _cost(curve: SRDCurve, axis: str, lam=None, alpha=None, beta=None):
    s, r, d = curve.arrays()
    if axis == AXIS_R:
        cost = r
    elif axis == AXIS_S:
        cost = s
    elif axis == AXIS_WEIGHTED:
        if lam is not None:
            cost = r + lam * s
        elif alpha is not None and beta is not None:
            cost = alpha * r + beta * s
        else:
            raise ValueError("weighted axis needs lambda or (alpha, beta)")
    else:
        raise ValueError(f"unknown axis {axis!r}")
    if np.any(cost <= 0):
        raise ValueError("costs must be positive for log-domain fitting")
    return d, np.log10(cost)


def bd_delta(ref: SRDCurve, test: SRDCurve, axis: str = AXIS_R,
             lam: float | None = None, alpha: float | None = None,
             beta: float | None = None) -> BDResult:
    """Average percent cost difference of test vs ref over the common
    distortion range (negative means the test method is cheaper)."""
    if len(ref.points) < 4 or len(test.points) < 4:
        raise ValueError("BD needs at least 4 points per curve")
    d_ref, c_ref = _cost(ref, axis, lam, alpha, beta)
    d_test, c_test = _cost(test, axis, lam, alpha, beta)
    lo = max(d_ref.min(), d_test.min())
    hi = min(d_ref.max(), d_test.max())
    if hi <= lo:
        raise ValueError("curves have no overlapping distortion range")
    p_ref = np.polyfit(d_ref, c_ref, 3)
    p_test = np.polyfit(d_test, c_test, 3)
    int_ref = np.polyval(np.polyint(p_ref), hi) - np.polyval(np.polyint(p_ref), lo)
    int_test = np.polyval(np.polyint(p_test), hi) - np.polyval(np.polyint(p_test), lo)
    avg_diff = (int_test - int_ref) / (hi - lo)
    return BDResult(delta_pct=(10.0 ** avg_diff - 1.0) * 100.0, axis=axis,
                    lam=lam, alpha=alpha, beta=beta, d_range=(lo, hi))


def weighted_cost_curve(curve: SRDCurve, lam: float):
    """(distortion, R + lambda*S) projection; lambda 0 degenerates to R-D."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    s, r, d = curve.arrays()
    return d, r + lam * s


_AXIS_GET = {
    "D": lambda p: p.psnr_db,
    "S": lambda p: p.s_bytes,
    "R": lambda p: p.r_bytes,
}


def iso_points(curve: SRDCurve, axis: str, value: float) -> SRDPoint:
    """Point of the qp-parameterized polyline where one coordinate equals
    value; exact at stored points, linear in between."""
    get = _AXIS_GET[axis]
    for p in curve.points:
        if get(p) == value:
            return p
    for a, b in zip(curve.points, curve.points[1:]):
        va, vb = get(a), get(b)
        if (va - value) * (vb - value) < 0:
            t = (value - va) / (vb - va)
            return SRDPoint(
                qp=a.qp + t * (b.qp - a.qp),
                s_bytes=a.s_bytes + t * (b.s_bytes - a.s_bytes),
                r_bytes=a.r_bytes + t * (b.r_bytes - a.r_bytes),
                psnr_db=a.psnr_db + t * (b.psnr_db - a.psnr_db),
            )
    raise ValueError(f"{axis}={value} outside the curve range")


def accumulated_rate(per_request_bits) -> list:
    """Running totals across a session's requests."""
    out = []
    total = 0
    for b in per_request_bits:
        total += b
        out.append(total)
    return out


def mad_ratio(rates) -> float:
    """Maximum absolute deviation of the rates relative to their mean."""
    rates = np.asarray(list(rates), dtype=np.float64)
    if rates.size == 0:
        raise ValueError("need at least one rate")
    mean = rates.mean()
    if mean <= 0:
        raise ValueError("mean rate must be positive")
    return float(np.abs(rates - mean).max() / mean)


# CSV I/O -----------------------------------------------------------------

CURVE_FIELDS = ("method", "qp", "S_bytes", "R_bytes", "psnr_db")
BD_FIELDS = ("ref", "test", "axis", "lambda", "delta_pct")


def write_curves(path, curves):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_FIELDS)
        for curve in curves:
            for p in curve.points:
                writer.writerow([curve.method, p.qp, f"{p.s_bytes:.3f}",
                                 f"{p.r_bytes:.3f}", f"{p.psnr_db:.6f}"])


def read_curves(path) -> list:
    rows: dict = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.setdefault(row["method"], []).append(SRDPoint(
                qp=int(row["qp"]), s_bytes=float(row["S_bytes"]),
                r_bytes=float(row["R_bytes"]), psnr_db=float(row["psnr_db"])))
    return [SRDCurve(method, pts) for method, pts in rows.items()]


def write_bd_report(path, rows):
    """rows: iterable of (ref, test, axis, lambda-or-empty, delta_pct)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BD_FIELDS)
        for ref, test, axis, lam, delta in rows:
            writer.writerow([ref, test, axis,
                             "" if lam is None else repr(lam),
                             f"{delta:.4f}"])
