"""
Extraction of parallel one-dimensional height profiles at a given angle.

Angles are measured in degrees from the vertical (row) axis of the image,
turning toward the horizontal axis: 0 deg walks down the columns, 90 deg
along the rows. Coordinates are ``(x, y) = (column, row)`` in pixel units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ingest import HeightField

__all__ = [
    "ProfileSet",
    "direction",
    "sample_bilinear",
    "sample_nearest",
    "extract_profiles",
]

INTERPOLATIONS = ("bilinear", "nearest")

# tolerance for deciding that a sample position lies on the image boundary
_EDGE_EPS = 1e-9


@dataclass(frozen=True)
class ProfileSet:
    """All parallel profiles extracted at one angle."""

    angle_deg: float
    delta: float
    profiles: tuple

    def __len__(self):
        return len(self.profiles)

    @property
    def lengths(self) -> np.ndarray:
        """Number of samples ``m + 1`` of every profile."""
        return np.array([len(p) for p in self.profiles], dtype=np.int64)

    @property
    def total_samples(self) -> int:
        return int(self.lengths.sum()) if self.profiles else 0


def direction(angle_deg: float) -> tuple[float, float]:
    """Unit step ``(dx, dy)`` along a profile; exact for multiples of 90 degrees."""
    a = float(angle_deg) % 180.0
    if a == 0.0:
        return 0.0, 1.0
    if a == 90.0:
        return 1.0, 0.0
    r = math.radians(a)
    dx, dy = math.sin(r), math.cos(r)
    # components below rounding level of the other one are exactly zero
    return (0.0 if abs(dx) < 1e-15 else dx), (0.0 if abs(dy) < 1e-15 else dy)


def _check_inside(field: HeightField, x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(x < 0) or np.any(y < 0) or np.any(x > field.w_x - 1) or np.any(y > field.w_y - 1):
        raise ValueError("sample coordinate outside the image rectangle")
    return x, y


def _bilinear(v: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    wy, wx = v.shape
    x0 = np.clip(np.floor(x).astype(np.int64), 0, max(wx - 2, 0))
    y0 = np.clip(np.floor(y).astype(np.int64), 0, max(wy - 2, 0))
    x1 = np.minimum(x0 + 1, wx - 1)
    y1 = np.minimum(y0 + 1, wy - 1)
    fx = x - x0
    fy = y - y0
    # weighted form keeps node values exact (fx, fy in {0, 1})
    return ((1 - fx) * (1 - fy) * v[y0, x0] + fx * (1 - fy) * v[y0, x1]
            + (1 - fx) * fy * v[y1, x0] + fx * fy * v[y1, x1])


def _nearest(v: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    wy, wx = v.shape
    xi = np.clip(np.floor(x + 0.5).astype(np.int64), 0, wx - 1)
    yi = np.clip(np.floor(y + 0.5).astype(np.int64), 0, wy - 1)
    return v[yi, xi]


def sample_bilinear(field: HeightField, x, y):
    """Bilinear interpolation at ``(x, y)``; scalars in, scalar out."""
    xs, ys = _check_inside(field, x, y)
    out = _bilinear(field.values, np.atleast_1d(xs), np.atleast_1d(ys))
    return float(out[0]) if np.ndim(x) == 0 and np.ndim(y) == 0 else out.reshape(np.shape(xs))


def sample_nearest(field: HeightField, x, y):
    """Value of the nearest pixel to ``(x, y)`` (halves round up)."""
    xs, ys = _check_inside(field, x, y)
    out = _nearest(field.values, np.atleast_1d(xs), np.atleast_1d(ys))
    return float(out[0]) if np.ndim(x) == 0 and np.ndim(y) == 0 else out.reshape(np.shape(xs))


def _line_ranges(wx: int, wy: int, angle_deg: float, delta: float):
    """
    Lay out the parallel lines for one angle.

    Returns ``(base_x, base_y, t_lo, t_hi, dx, dy)`` where line ``i`` visits
    ``(base_x[i] + t*dx, base_y[i] + t*dy)`` for integers ``t_lo[i] <= t <= t_hi[i]``.
    """
    dx, dy = direction(angle_deg)
    # offsets grow toward +x at 0 deg and toward +y at 90 deg
    nx, ny = (dy, -dx) if angle_deg < 90.0 else (-dy, dx)
    # the reference line runs through a pixel centre near the middle, so that
    # axis-aligned lines hit pixel centres for integer delta
    cx, cy = float((wx - 1) // 2), float((wy - 1) // 2)
    corners = np.array([[0, 0], [wx - 1, 0], [0, wy - 1], [wx - 1, wy - 1]], dtype=np.float64)
    reach = np.abs((corners[:, 0] - cx) * nx + (corners[:, 1] - cy) * ny).max()
    kmax = int(math.ceil(reach / delta)) + 1
    k = np.arange(-kmax, kmax + 1, dtype=np.float64)
    bx = cx + k * delta * nx
    by = cy + k * delta * ny

    lo = np.full(k.shape, -np.inf)
    hi = np.full(k.shape, np.inf)
    for base, step, size in ((bx, dx, wx), (by, dy, wy)):
        if step == 0.0:
            outside = (base < -_EDGE_EPS) | (base > size - 1 + _EDGE_EPS)
            lo[outside] = np.inf
        else:
            a = (0.0 - base) / step
            b = (size - 1 - base) / step
            lo = np.maximum(lo, np.minimum(a, b))
            hi = np.minimum(hi, np.maximum(a, b))
    with np.errstate(invalid="ignore"):
        t_lo = np.ceil(lo - _EDGE_EPS)
        t_hi = np.floor(hi + _EDGE_EPS)
    ok = np.isfinite(t_lo) & np.isfinite(t_hi) & (t_hi - t_lo >= 2)
    return bx[ok], by[ok], t_lo[ok].astype(np.int64), t_hi[ok].astype(np.int64), dx, dy


def extract_profiles(field: HeightField, angle_deg: float, delta: float = 1.0,
                     interpolation: str = "bilinear") -> ProfileSet:
    """
    Sample all lines at ``angle_deg`` that are integer multiples of ``delta``
    apart from a reference line through the image centre.

    Consecutive samples on a line are one pixel width apart; each line keeps
    the longest run of such samples inside the image, and lines with fewer
    than three samples are dropped. Profiles are ordered by their signed
    offset from the reference line.
    """
    if not 0.0 <= angle_deg < 180.0:
        raise ValueError("angle_deg must lie in [0, 180)")
    if not delta > 0:
        raise ValueError("delta must be positive")
    if interpolation not in INTERPOLATIONS:
        raise ValueError(f"interpolation must be one of {INTERPOLATIONS}")

    wy, wx = field.shape
    bx, by, t_lo, t_hi, dx, dy = _line_ranges(wx, wy, angle_deg, delta)
    if len(bx) == 0:
        return ProfileSet(float(angle_deg), float(delta), ())
    counts = t_hi - t_lo + 1
    line = np.repeat(np.arange(len(bx)), counts)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    t = (np.arange(counts.sum()) - np.repeat(starts, counts) + np.repeat(t_lo, counts)).astype(np.float64)
    x = np.clip(bx[line] + t * dx, 0.0, wx - 1)
    y = np.clip(by[line] + t * dy, 0.0, wy - 1)
    sampler = _bilinear if interpolation == "bilinear" else _nearest
    flat = sampler(field.values, x, y)
    profiles = tuple(np.split(flat, np.cumsum(counts)[:-1]))
    return ProfileSet(float(angle_deg), float(delta), profiles)
