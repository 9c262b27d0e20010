"""
Change-pattern counting, change-probability estimates and scale-dependent
Hurst exponents over a grid of angles and delays.

A window ``(x[j], x[j+tau], x[j+2*tau])`` is a *change* when the middle
value turns the direction of the profile::

    (x[j] <  x[j+tau] and x[j+tau] >= x[j+2*tau]) or
    (x[j] >= x[j+tau] and x[j+tau] <  x[j+2*tau])

Ties are resolved only by this strict/non-strict split.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ingest import HeightField, detrend as _detrend
from .profiles import INTERPOLATIONS, ProfileSet, extract_profiles

__all__ = [
    "AnalysisConfig",
    "RoughnessMatrix",
    "InsufficientDataError",
    "count_changes",
    "estimate_change_prob",
    "h_transform",
    "analyze",
    "angle_grid",
    "tau_max",
    "median_hurst",
]


class InsufficientDataError(ValueError):
    """No profile is long enough for the requested delay."""


def angle_grid(n_phi: int) -> np.ndarray:
    """``n_phi`` equally spaced angles in ``[0, 180)``, starting at 0."""
    if n_phi < 1:
        raise ValueError("n_phi must be positive")
    return np.arange(n_phi) * (180.0 / n_phi)


@dataclass(frozen=True)
class AnalysisConfig:
    n_phi: int = 30
    delays: tuple = (3, 4, 5)
    delta: float = 1.0
    detrend: bool = True
    interpolation: str = "bilinear"

    def __post_init__(self):
        delays = tuple(int(t) for t in self.delays)
        if not delays:
            raise ValueError("at least one delay is required")
        if any(t < 1 for t in delays):
            raise ValueError("delays must be positive integers")
        if any(b <= a for a, b in zip(delays, delays[1:])):
            raise ValueError("delays must be strictly increasing")
        if self.n_phi < 1:
            raise ValueError("n_phi must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.interpolation not in INTERPOLATIONS:
            raise ValueError(f"interpolation must be one of {INTERPOLATIONS}")
        if delays[0] <= 2:
            warnings.warn("delays of 1 or 2 are biased by interpolation smoothing; "
                          "prefer delays larger than 2", stacklevel=3)
        object.__setattr__(self, "delays", delays)

    @property
    def angles_deg(self) -> np.ndarray:
        return angle_grid(self.n_phi)


@dataclass(frozen=True)
class RoughnessMatrix:
    """
    Change-probability and Hurst estimates on an angle x delay grid.

    Undefined entries (no profile long enough) are NaN in ``p_hat`` and
    ``h_hat``; ``p_hat == 1`` gives ``h_hat == -inf``.
    """

    angles_deg: np.ndarray
    delays: np.ndarray
    p_hat: np.ndarray
    h_hat: np.ndarray
    numerators: np.ndarray = field(repr=False)
    windows: np.ndarray = field(repr=False)

    @classmethod
    def from_counts(cls, angles_deg, delays, numerators, windows) -> "RoughnessMatrix":
        num = np.asarray(numerators, dtype=np.int64)
        win = np.asarray(windows, dtype=np.int64)
        with np.errstate(invalid="ignore", divide="ignore"):
            p = np.where(win > 0, num / np.maximum(win, 1), np.nan)
        return cls(np.asarray(angles_deg, dtype=np.float64), np.asarray(delays, dtype=np.int64),
                   p, h_transform(p), num, win)

    @property
    def shape(self):
        return self.p_hat.shape

    def column(self, tau: int) -> int:
        hits = np.flatnonzero(self.delays == tau)
        if len(hits) == 0:
            raise KeyError(f"delay {tau} not in matrix")
        return int(hits[0])


def _change_indicator(x: np.ndarray, tau: int) -> np.ndarray:
    a, b, c = x[:-2 * tau], x[tau:len(x) - tau], x[2 * tau:]
    return ((a < b) & (b >= c)) | ((a >= b) & (b < c))


def count_changes(profile, tau: int) -> tuple[int, int]:
    """
    Number of change windows at delay ``tau`` and the number of windows.

    A profile of ``m + 1`` samples has ``m - 2*tau + 1`` windows; shorter
    profiles give ``(0, 0)``.
    """
    if tau < 1:
        raise ValueError("tau must be a positive integer")
    x = np.asarray(profile, dtype=np.float64)
    m = len(x) - 1
    if m < 2 * tau:
        return 0, 0
    return int(np.count_nonzero(_change_indicator(x, tau))), m - 2 * tau + 1


class _FlatProfiles:
    """Profiles laid end to end so that one delay is counted with a single pass."""

    def __init__(self, profiles: ProfileSet):
        lengths = profiles.lengths
        self.values = np.concatenate(profiles.profiles) if len(lengths) else np.empty(0)
        ends = np.cumsum(lengths)
        # samples remaining after index j within its own profile
        self.remaining = np.repeat(ends, lengths) - 1 - np.arange(int(lengths.sum()))
        self.lengths = lengths

    def counts(self, tau: int) -> tuple[int, int]:
        x = self.values
        if len(x) <= 2 * tau:
            return 0, 0
        valid = self.remaining[:len(x) - 2 * tau] >= 2 * tau
        num = int(np.count_nonzero(_change_indicator(x, tau) & valid))
        win = int(np.maximum(self.lengths - 2 * tau, 0).sum())
        return num, win


def estimate_change_prob(profiles: ProfileSet, tau: int) -> float:
    """Pooled change probability over all profiles with at least ``2*tau + 1`` samples."""
    if tau < 1:
        raise ValueError("tau must be a positive integer")
    num, win = _FlatProfiles(profiles).counts(tau)
    if win == 0:
        raise InsufficientDataError(
            f"insufficient data at angle {profiles.angle_deg:g} deg, delay {tau}")
    return num / win


def h_transform(p):
    """
    ``1 + log2(sin(pi * (1 - p) / 2))``, mapping a change probability to a
    Hurst exponent of delay.

    Defined on ``[0, 1]``: ``h(0) = 1``, ``h(2/3) = 0`` and ``h(1) = -inf``.
    NaN passes through. Works on scalars and arrays.
    """
    arr = np.asarray(p, dtype=np.float64)
    if np.any((arr < 0) | (arr > 1)):
        raise ValueError("change probability must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        out = 1.0 + np.log2(np.sin(np.pi * (1.0 - arr) / 2.0))
    out = np.where(arr == 1.0, -np.inf, out)
    return float(out) if out.ndim == 0 else out


def _angle_counts(values: HeightField, angle: float, delays, delta, interpolation):
    flat = _FlatProfiles(extract_profiles(values, angle, delta, interpolation))
    res = [flat.counts(t) for t in delays]
    return [r[0] for r in res], [r[1] for r in res]


def analyze(field: HeightField, config: AnalysisConfig, workers: int = 1) -> RoughnessMatrix:
    """
    Estimate change probabilities and Hurst exponents for every angle of
    ``config.angles_deg`` and every delay of ``config.delays``.

    Angles are independent; ``workers > 1`` processes them on a thread pool
    with identical results.
    """
    if field.w_x < 3 or field.w_y < 3:
        raise ValueError("analysis needs a field of at least 3x3 pixels")
    if config.detrend:
        field = _detrend(field)
    angles = config.angles_deg

    def run(angle):
        return _angle_counts(field, angle, config.delays, config.delta, config.interpolation)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, angles))
    else:
        rows = [run(a) for a in angles]
    num = np.array([r[0] for r in rows], dtype=np.int64).reshape(len(angles), len(config.delays))
    win = np.array([r[1] for r in rows], dtype=np.int64).reshape(len(angles), len(config.delays))
    return RoughnessMatrix.from_counts(angles, config.delays, num, win)


def tau_max(w_x: int, w_y: int) -> int:
    """Smallest integer ``t`` with ``t**4 >= w_x * w_y``."""
    if w_x < 1 or w_y < 1:
        raise ValueError("image dimensions must be positive")
    area = int(w_x) * int(w_y)
    t = max(1, int(round(area ** 0.25)))
    while t ** 4 < area:
        t += 1
    while t > 1 and (t - 1) ** 4 >= area:
        t -= 1
    return t


def median_hurst(matrix: RoughnessMatrix, tau_min: int = 3, tau_max: int | None = None) -> np.ndarray:
    """
    Per angle: median of the change probabilities over delays
    ``tau_min..tau_max``, mapped through :func:`h_transform`.

    Undefined entries are skipped; an angle with no defined entry gives NaN.
    """
    if tau_min < 3:
        raise ValueError("tau_min must be at least 3")
    delays = matrix.delays
    if tau_max is None:
        tau_max = int(delays.max())
    wanted = np.arange(tau_min, tau_max + 1)
    missing = np.setdiff1d(wanted, delays)
    if len(missing):
        raise KeyError(f"delays {missing.tolist()} not present in matrix")
    cols = np.isin(delays, wanted)
    out = np.full(matrix.p_hat.shape[0], np.nan)
    for i, row in enumerate(matrix.p_hat[:, cols]):
        row = row[np.isfinite(row)]
        if len(row):
            out[i] = h_transform(float(np.median(row)))
    return out
