"""
Serialization of roughness matrices and the experiment harnesses: the noise
robustness sweep and the fBm validation run.

CSV files are UTF-8, comma separated with LF line endings. Matrix cells use
the shortest round-trip decimal (``repr``); undefined entries (no data, or
``h = -inf``) are empty cells.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass

import numpy as np

from .changes import AnalysisConfig, RoughnessMatrix, analyze, count_changes, h_transform, median_hurst
from .changes import tau_max as _tau_max
from .ingest import HeightField, add_white_noise, image_std
from .simulate import RNG_ALGORITHM, simulate_fbm
from .svg import line_plot_svg, polar_svg, write_svg

__all__ = [
    "write_csv",
    "read_csv",
    "matrix_csv",
    "noise_error",
    "NoiseReport",
    "run_noise_experiment",
    "FbmValidationReport",
    "run_fbm_validation",
    "path_hurst",
    "render_polar_svg",
    "render_delay_svg",
    "render_median_polar_svg",
]

log = logging.getLogger(__name__)

CORNER_LABEL = "angle_deg/tau"


def _cell(v: float) -> str:
    return repr(float(v)) if np.isfinite(v) else ""


def _write_text(text: str, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def matrix_csv(matrix: RoughnessMatrix, values: str = "p_hat") -> str:
    """CSV text of ``matrix.p_hat`` or ``matrix.h_hat`` with angle and delay headers."""
    if values not in ("p_hat", "h_hat"):
        raise ValueError("values must be 'p_hat' or 'h_hat'")
    data = getattr(matrix, values)
    rows = [[CORNER_LABEL] + [str(int(t)) for t in matrix.delays]]
    for angle, row in zip(matrix.angles_deg, data):
        rows.append([f"{angle:.6f}"] + [_cell(v) for v in row])
    return _rows_to_csv(rows)


def write_csv(matrix: RoughnessMatrix, path, values: str = "p_hat") -> None:
    """Write one matrix of ``matrix`` (``"p_hat"`` or ``"h_hat"``) to ``path``."""
    _write_text(matrix_csv(matrix, values), path)


def read_csv(path):
    """
    Read a matrix CSV written by :func:`write_csv`.

    Returns ``(angles_deg, delays, values)``; empty cells become NaN.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or rows[0][0] != CORNER_LABEL:
        raise ValueError(f"{path}: not a roughness matrix CSV")
    delays = np.array([int(t) for t in rows[0][1:]], dtype=np.int64)
    angles = np.array([float(r[0]) for r in rows[1:]], dtype=np.float64)
    values = np.array([[float(c) if c else np.nan for c in r[1:]] for r in rows[1:]],
                      dtype=np.float64).reshape(len(angles), len(delays))
    return angles, delays, values


# --------------------------------------------------------------------------
# plots


def _pick_taus(delays, count: int = 5):
    delays = [int(t) for t in delays]
    if len(delays) <= count:
        return delays
    idx = np.unique(np.round(np.linspace(0, len(delays) - 1, count)).astype(int))
    return [delays[i] for i in idx]


def render_polar_svg(matrix: RoughnessMatrix, taus_to_plot=None, path=None) -> str:
    """Polar plot of the Hurst estimate against angle, one closed curve per delay."""
    taus = _pick_taus(matrix.delays) if taus_to_plot is None else [int(t) for t in taus_to_plot]
    curves = [matrix.h_hat[:, matrix.column(t)] for t in taus]
    text = polar_svg(matrix.angles_deg, curves, [f"tau = {t}" for t in taus],
                     title="Hurst exponent of delay by direction")
    if path is not None:
        write_svg(text, path)
    return text


def render_delay_svg(matrix: RoughnessMatrix, path=None) -> str:
    """Hurst estimate against delay, one polyline per angle."""
    series = [(f"{a:g}°", matrix.delays, row) for a, row in zip(matrix.angles_deg, matrix.h_hat)]
    text = line_plot_svg(series, "delay tau", "H(tau)", title="Hurst exponent of delay by angle")
    if path is not None:
        write_svg(text, path)
    return text


def render_median_polar_svg(angles_deg, median_h, path=None) -> str:
    """Polar plot of the median Hurst exponent per direction."""
    text = polar_svg(angles_deg, [median_h], ["median Hurst exponent"],
                     title="Median Hurst exponent by direction")
    if path is not None:
        write_svg(text, path)
    return text


# --------------------------------------------------------------------------
# noise experiment


def noise_error(h_clean, h_noisy, n_phi: int | None = None) -> float:
    """
    ``sqrt(sum_phi (h_noisy - h_clean)**2) / n_phi``.

    This is the root of the sum divided by ``n_phi``, not a root mean square.
    Pairs with an undefined (non-finite) entry on either side are dropped and
    ``n_phi`` shrinks by the number dropped; the exclusion is logged. Returns
    NaN when nothing is left.
    """
    a = np.asarray(h_clean, dtype=np.float64)
    b = np.asarray(h_noisy, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if n_phi is None:
        n_phi = len(a)
    if n_phi != len(a):
        raise ValueError(f"n_phi={n_phi} does not match vector length {len(a)}")
    ok = np.isfinite(a) & np.isfinite(b)
    dropped = int(len(a) - ok.sum())
    if dropped:
        log.warning("noise_error: %d undefined angle(s) excluded, n_phi reduced to %d",
                    dropped, n_phi - dropped)
    n = n_phi - dropped
    if n == 0:
        return float("nan")
    # hypot scales internally, so tiny differences do not underflow to zero
    return math.hypot(*(b[ok] - a[ok])) / n


@dataclass(frozen=True)
class NoiseReport:
    """Error of every estimator for every noise level."""

    sigmas: np.ndarray
    estimators: tuple
    errors: np.ndarray          # (len(sigmas), len(estimators))
    sigma_img: float
    n_phi: int
    seed: int

    def error(self, estimator: str) -> np.ndarray:
        return self.errors[:, self.estimators.index(estimator)]

    def to_csv(self) -> str:
        rows = [["sigma", "sigma_rel"] + list(self.estimators)]
        for s, row in zip(self.sigmas, self.errors):
            rel = s / self.sigma_img if self.sigma_img > 0 else float("nan")
            rows.append([repr(float(s)), _cell(rel)] + [_cell(v) for v in row])
        return _rows_to_csv(rows)

    def to_svg(self) -> str:
        series = [(name, self.sigmas, self.errors[:, j]) for j, name in enumerate(self.estimators)]
        return line_plot_svg(series, "noise sigma", "error", title="Estimator error under white noise",
                             logx=True, logy=True)

    def write(self, csv_path=None, svg_path=None) -> None:
        if csv_path is not None:
            _write_text(self.to_csv(), csv_path)
        if svg_path is not None:
            write_svg(self.to_svg(), svg_path)


def run_noise_experiment(field: HeightField, sigmas, taus, n_phi: int = 20, seed: int = 0,
                         interpolation: str = "bilinear", detrend: bool = True) -> NoiseReport:
    """
    Add white noise of each standard deviation in ``sigmas`` to ``field`` and
    compare the Hurst estimates with the noise-free ones.

    Estimators are the per-delay estimate for each ``tau`` in ``taus`` plus the
    median Hurst exponent over delays ``3..tau_max``. Noise for ``sigmas[i]``
    is drawn from stream ``i + 1`` of ``seed``.
    """
    sigmas = np.asarray(sigmas, dtype=np.float64)
    if np.any(sigmas < 0):
        raise ValueError("sigmas must be non-negative")
    taus = [int(t) for t in taus]
    tmax = _tau_max(field.w_x, field.w_y)
    delays = tuple(sorted(set(taus) | set(range(3, tmax + 1))))
    config = AnalysisConfig(n_phi=n_phi, delays=delays, detrend=detrend, interpolation=interpolation)

    def estimates(m: RoughnessMatrix):
        cols = [m.h_hat[:, m.column(t)] for t in taus]
        return cols + [median_hurst(m, 3, tmax)]

    clean = estimates(analyze(field, config))
    errors = np.empty((len(sigmas), len(taus) + 1))
    for i, s in enumerate(sigmas):
        noisy = estimates(analyze(add_white_noise(field, float(s), seed, stream=i + 1), config))
        errors[i] = [noise_error(c, n) for c, n in zip(clean, noisy)]
    names = tuple(f"tau={t}" for t in taus) + ("median",)
    return NoiseReport(sigmas, names, errors, image_std(field), n_phi, int(seed))


# --------------------------------------------------------------------------
# fBm validation


@dataclass(frozen=True)
class FbmValidationReport:
    """Per-delay mean and standard deviation of the Hurst estimate over simulated fBm paths."""

    H: float
    n: int
    reps: int
    seed: int
    taus: np.ndarray
    estimates: np.ndarray       # (reps, len(taus))

    @property
    def mean(self) -> np.ndarray:
        return self.estimates.mean(axis=0)

    @property
    def sd(self) -> np.ndarray:
        if self.reps < 2:
            return np.zeros(len(self.taus))
        return self.estimates.std(axis=0, ddof=1)

    def to_csv(self) -> str:
        rows = [["tau", "mean_h", "sd_h", "target_h", "reps", "n", "seed", "rng"]]
        for t, m, s in zip(self.taus, self.mean, self.sd):
            rows.append([str(int(t)), _cell(m), _cell(s), repr(float(self.H)),
                         str(self.reps), str(self.n), str(self.seed), RNG_ALGORITHM])
        return _rows_to_csv(rows)

    def to_svg(self) -> str:
        m, s = self.mean, self.sd
        return line_plot_svg([(f"mean over {self.reps} paths", self.taus, m)], "delay tau", "H(tau)",
                             title=f"fBm validation, H = {self.H:g}, n = {self.n}",
                             hline=self.H, bands=[(self.taus, m - s, m + s)])

    def write(self, csv_path=None, svg_path=None) -> None:
        if csv_path is not None:
            _write_text(self.to_csv(), csv_path)
        if svg_path is not None:
            write_svg(self.to_svg(), svg_path)


def path_hurst(path, taus) -> np.ndarray:
    """Hurst estimate of delay for each ``tau`` from a single path."""
    out = np.empty(len(taus))
    for j, t in enumerate(taus):
        num, win = count_changes(path, int(t))
        out[j] = h_transform(num / win) if win else np.nan
    return out


def run_fbm_validation(H: float, n: int, reps: int, taus, seed: int = 0) -> FbmValidationReport:
    """
    Estimate the Hurst exponent of delay on ``reps`` independent fBm paths of
    ``n`` steps. Path ``r`` uses stream ``r`` of ``seed``.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    taus = np.array([int(t) for t in taus], dtype=np.int64)
    est = np.empty((reps, len(taus)))
    for r in range(reps):
        est[r] = path_hurst(simulate_fbm(n, H, seed, stream=r).path, taus)
    return FbmValidationReport(float(H), int(n), int(reps), int(seed), taus, est)
