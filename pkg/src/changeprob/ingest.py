"""
Height-field input and preparation: PGM and XYZ readers, point-cloud gridding,
plane detrending, cropping, global statistics and white-noise perturbation.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "HeightField",
    "PointCloud",
    "PGMError",
    "PGMFormatError",
    "PGMHeaderError",
    "PGMTruncatedError",
    "PGMMaxvalError",
    "read_pgm",
    "write_pgm",
    "read_xyz",
    "grid_point_cloud",
    "sparse_cells",
    "detrend",
    "image_std",
    "add_white_noise",
    "crop",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HeightField:
    """
    Rectangular grid of heights.

    ``values`` has shape ``(w_y, w_x)``: rows run along the vertical image
    axis, columns along the horizontal one. The array is copied and made
    read-only on construction.
    """

    values: np.ndarray
    pixel_spacing: float = 1.0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim != 2 or v.size == 0:
            raise ValueError(f"height field must be a non-empty 2D array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("height field contains non-finite values")
        if not self.pixel_spacing > 0:
            raise ValueError("pixel_spacing must be positive")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "pixel_spacing", float(self.pixel_spacing))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def w_x(self) -> int:
        return self.values.shape[1]

    @property
    def w_y(self) -> int:
        return self.values.shape[0]

    def with_values(self, values) -> "HeightField":
        return HeightField(values, self.pixel_spacing)


@dataclass(frozen=True)
class PointCloud:
    """Scattered ``(x, y, z)`` samples, stored as an ``(n, 3)`` float array."""

    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.array(self.points, dtype=np.float64, copy=True)
        if p.ndim != 2 or p.shape[1] != 3:
            raise ValueError(f"point cloud must have shape (n, 3), got {p.shape}")
        if p.shape[0] == 0:
            raise ValueError("point cloud is empty")
        if not np.all(np.isfinite(p)):
            raise ValueError("point cloud contains non-finite coordinates")
        p.flags.writeable = False
        object.__setattr__(self, "points", p)

    def __len__(self):
        return self.points.shape[0]


# --------------------------------------------------------------------------
# PGM


class PGMError(ValueError):
    """Base class for PGM parse failures."""


class PGMFormatError(PGMError):
    """Magic number is not the binary graymap ``P5``."""


class PGMHeaderError(PGMError):
    """Header tokens are missing or not valid integers."""


class PGMTruncatedError(PGMError):
    """Payload is shorter than the header announces."""


class PGMMaxvalError(PGMError):
    """Maxval other than 255 or 65535."""


def _header_tokens(data: bytes, count: int):
    """Return ``count`` whitespace separated header tokens and the payload offset."""
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise PGMHeaderError("unexpected end of header")
        if data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates maxval from the raster
    if pos >= n or not data[pos:pos + 1].isspace():
        raise PGMHeaderError("missing whitespace after maxval")
    return tokens, pos + 1


def read_pgm(path) -> HeightField:
    """
    Read a binary (P5) PGM file.

    Pixel integers are returned unchanged as floats. 16-bit samples are
    big-endian, per the Netpbm convention.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 2 or data[:2] != b"P5":
        raise PGMFormatError(f"{os.fspath(path)}: unsupported format {data[:2]!r} (only binary P5 is read)")
    tokens, offset = _header_tokens(data[2:], 3)
    offset += 2
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise PGMHeaderError(f"{os.fspath(path)}: malformed header {tokens!r}") from exc
    if width <= 0 or height <= 0:
        raise PGMHeaderError(f"{os.fspath(path)}: non-positive dimensions {width}x{height}")
    if maxval not in (255, 65535):
        raise PGMMaxvalError(f"{os.fspath(path)}: unsupported maxval {maxval}")
    dtype = np.dtype(">u2") if maxval == 65535 else np.dtype("u1")
    nbytes = width * height * dtype.itemsize
    payload = data[offset:offset + nbytes]
    if len(payload) < nbytes:
        raise PGMTruncatedError(
            f"{os.fspath(path)}: expected {nbytes} payload bytes, found {len(payload)}")
    pixels = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return HeightField(pixels.astype(np.float64))


def write_pgm(field: HeightField, path, bitdepth: int = 16) -> None:
    """
    Write ``field`` as binary PGM after an affine rescale of its range onto
    ``[0, maxval]`` (round half up). A constant field is written as zeros.
    """
    if bitdepth not in (8, 16):
        raise ValueError("bitdepth must be 8 or 16")
    maxval = 255 if bitdepth == 8 else 65535
    v = field.values
    lo, hi = v.min(), v.max()
    if hi > lo:
        scaled = np.floor((v - lo) * maxval / (hi - lo) + 0.5)
    else:
        scaled = np.zeros_like(v)
    scaled = np.clip(scaled, 0, maxval)
    dtype = ">u2" if bitdepth == 16 else "u1"
    header = f"P5\n{v.shape[1]} {v.shape[0]}\n{maxval}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(scaled.astype(dtype).tobytes())


# --------------------------------------------------------------------------
# point clouds


def read_xyz(path) -> PointCloud:
    """Read three numeric columns separated by whitespace or commas; ``#`` starts a comment."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].replace(",", " ").strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 3:
                raise ValueError(f"{os.fspath(path)}:{lineno}: expected 3 columns, got {len(parts)}")
            rows.append([float(p) for p in parts[:3]])
    if not rows:
        raise ValueError(f"{os.fspath(path)}: no points")
    return PointCloud(np.array(rows))


def _grid_axes(cloud: PointCloud, cell_size: float):
    if not cell_size > 0:
        raise ValueError("cell_size must be positive")
    xy = cloud.points[:, :2]
    lo = xy.min(axis=0)
    extent = xy.max(axis=0) - lo
    n = np.floor(extent / cell_size + 1e-9).astype(int) + 1
    gx = lo[0] + cell_size * np.arange(n[0])
    gy = lo[1] + cell_size * np.arange(n[1])
    return gx, gy


def _nearest(cloud: PointCloud, gx, gy):
    """Nearest point per grid node; ties go to the lowest point index."""
    pts = cloud.points
    X, Y = np.meshgrid(gx, gy)
    q = np.column_stack([X.ravel(), Y.ravel()])
    k = min(8, len(pts))
    tree = cKDTree(pts[:, :2])
    _, idx = tree.query(q, k=k)
    idx = np.asarray(idx).reshape(len(q), k)
    d2 = (pts[idx, 0] - q[:, :1]) ** 2 + (pts[idx, 1] - q[:, 1:]) ** 2
    best_d2 = d2.min(axis=1)
    # among exact ties keep the smallest input index
    cand = np.where(d2 == best_d2[:, None], idx, len(pts))
    best = cand.min(axis=1)
    # all k candidates tied: more ties may exist beyond k, resolve by full scan
    if k < len(pts):
        for r in np.flatnonzero(d2[:, -1] == best_d2):
            full = (pts[:, 0] - q[r, 0]) ** 2 + (pts[:, 1] - q[r, 1]) ** 2
            best[r] = int(np.argmin(full))
            best_d2[r] = full[best[r]]
    shape = (len(gy), len(gx))
    return best.reshape(shape), np.sqrt(best_d2).reshape(shape)


def grid_point_cloud(cloud: PointCloud, cell_size: float) -> HeightField:
    """
    Nearest-neighbour gridding of a point cloud.

    The grid starts at the minimum ``(x, y)`` of the cloud and covers its
    bounding box at ``cell_size`` spacing; rows follow ``y``, columns ``x``.
    Nodes farther than ``4 * cell_size`` from every point are reported in the
    log; see :func:`sparse_cells` to locate them before cropping.
    """
    gx, gy = _grid_axes(cloud, cell_size)
    idx, dist = _nearest(cloud, gx, gy)
    far = int(np.count_nonzero(dist > 4 * cell_size))
    if far:
        log.warning("%d grid cells are farther than 4 cells from any point; consider cropping", far)
    return HeightField(cloud.points[idx, 2], pixel_spacing=cell_size)


def sparse_cells(cloud: PointCloud, cell_size: float, factor: float = 4.0) -> np.ndarray:
    """Boolean mask of grid nodes whose nearest point is farther than ``factor * cell_size``."""
    gx, gy = _grid_axes(cloud, cell_size)
    _, dist = _nearest(cloud, gx, gy)
    return dist > factor * cell_size


# --------------------------------------------------------------------------
# preparation


def detrend(field: HeightField) -> HeightField:
    """
    Subtract the least-squares plane ``a*row + b*col + c``.

    The plane is solved from the normal equations in centred coordinates.
    Degenerate axes (a single row or column) get a zero slope. Residuals at
    the rounding-noise level of the input are set to exactly zero so that an
    exact plane detrends to a tie-only field.
    """
    v = field.values
    rows, cols = np.indices(v.shape, dtype=np.float64)
    rows -= rows.mean()
    cols -= cols.mean()
    design = np.column_stack([rows.ravel(), cols.ravel(), np.ones(v.size)])
    normal = design.T @ design
    rhs = design.T @ v.ravel()
    coef = np.linalg.lstsq(normal, rhs, rcond=None)[0]
    resid = v - (design @ coef).reshape(v.shape)
    scale = np.abs(v).max()
    resid[np.abs(resid) <= 64 * np.finfo(float).eps * scale] = 0.0
    return field.with_values(resid)


def image_std(field: HeightField) -> float:
    """Sample standard deviation of all pixel values (divisor ``w_x*w_y - 1``)."""
    v = field.values
    if v.size < 2:
        raise ValueError("image_std needs at least two pixels")
    return float(np.sqrt(np.sum((v - v.mean()) ** 2) / (v.size - 1)))


def add_white_noise(field: HeightField, sigma: float, seed: int, stream: int = 0) -> HeightField:
    """Add i.i.d. ``N(0, sigma**2)`` noise to every pixel; reproducible from ``(seed, stream)``."""
    from .simulate import make_rng

    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return field
    rng = make_rng(seed, stream)
    return field.with_values(field.values + rng.normal(0.0, sigma, size=field.shape))


def crop(field: HeightField, x0: int, y0: int, w: int, h: int) -> HeightField:
    """Copy the ``h`` rows by ``w`` columns sub-grid whose top-left pixel is ``(x0, y0)``."""
    if w < 3 or h < 3:
        raise ValueError("crop must be at least 3x3")
    if x0 < 0 or y0 < 0 or x0 + w > field.w_x or y0 + h > field.w_y:
        raise IndexError(
            f"crop rectangle x0={x0} y0={y0} w={w} h={h} exceeds field {field.w_x}x{field.w_y}")
    return field.with_values(field.values[y0:y0 + h, x0:x0 + w])
