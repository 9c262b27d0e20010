"""
Sample paths of stationary Gaussian increment processes and synthetic
anisotropic test surfaces.

Random streams come from numpy's counter-based Philox4x64-10 generator. The
128-bit key is ``seed + 2**64 * stream``, so a master seed fans out into
independent, reproducible streams by counting ``stream = 0, 1, 2, ...``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .gaussian import GaussianModel, _evaluate, fgn_autocorr
from .ingest import HeightField

__all__ = [
    "RNG_ALGORITHM",
    "ModelError",
    "SimulatedPath",
    "make_rng",
    "simulate_fgn",
    "simulate_fbm",
    "simulate_from_autocorr",
    "simulate_surface",
]

RNG_ALGORITHM = "philox4x64-10; key = seed + 2**64 * stream; normals via numpy Generator.standard_normal"

# largest dimension handed to the dense Cholesky backend
CHOLESKY_MAX_N = 4096
# embedding sizes tried: 2n, 4n, ..., 2**_MAX_DOUBLINGS * 2n
_MAX_DOUBLINGS = 4


class ModelError(ValueError):
    """The autocorrelation does not define a valid covariance for simulation."""


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for stream ``stream`` of master ``seed`` (both non-negative integers)."""
    seed, stream = int(seed), int(stream)
    if seed < 0 or stream < 0 or seed >= 2 ** 64 or stream >= 2 ** 64:
        raise ValueError("seed and stream must lie in [0, 2**64)")
    return np.random.Generator(np.random.Philox(key=seed + (stream << 64)))


@dataclass(frozen=True)
class SimulatedPath:
    increments: np.ndarray
    path: np.ndarray
    model: GaussianModel
    seed: int


def _circulant_eigs(autocorr, n: int):
    """Eigenvalues of the smallest nonnegative circulant embedding, or None."""
    m = n
    for _ in range(_MAX_DOUBLINGS + 1):
        r = _evaluate(autocorr, np.arange(m + 1, dtype=np.float64))
        row = np.concatenate([r, r[-2:0:-1]])
        lam = np.fft.fft(row).real
        if lam.min() >= -1e-10 * max(lam.max(), 1.0):
            return np.clip(lam, 0.0, None)
        m *= 2
    return None


def _sample_circulant(lam: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    size = len(lam)
    z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return np.fft.fft(np.sqrt(lam / size) * z).real[:n]


def _sample_cholesky(autocorr, n: int, rng: np.random.Generator) -> np.ndarray:
    r = _evaluate(autocorr, np.arange(n, dtype=np.float64))
    try:
        chol = scipy.linalg.cholesky(scipy.linalg.toeplitz(r), lower=True)
    except np.linalg.LinAlgError as exc:
        raise ModelError("covariance matrix is not positive definite") from exc
    return chol @ rng.standard_normal(n)


def simulate_from_autocorr(n: int, autocorr, seed: int, backend: str = "auto",
                           stream: int = 0) -> np.ndarray:
    """
    ``n`` samples of a zero-mean stationary Gaussian sequence with
    autocorrelation ``autocorr`` (a callable on integer lags, ``c(0) = 1``).

    ``backend`` is ``"circulant"`` (exact circulant embedding), ``"cholesky"``
    (dense factorisation) or ``"auto"``, which tries the embedding first and
    falls back to Cholesky for ``n <= CHOLESKY_MAX_N``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if backend not in ("auto", "circulant", "cholesky"):
        raise ValueError(f"unknown backend {backend!r}")
    c0 = float(_evaluate(autocorr, np.zeros(1))[0])
    if not np.isclose(c0, 1.0, rtol=0, atol=1e-12):
        raise ModelError(f"autocorrelation at lag 0 must be 1, got {c0}")
    rng = make_rng(seed, stream)
    if n == 1:
        return rng.standard_normal(1)
    if backend in ("auto", "circulant"):
        lam = _circulant_eigs(autocorr, n)
        if lam is not None:
            return _sample_circulant(lam, n, rng)
        if backend == "circulant" or n > CHOLESKY_MAX_N:
            raise ModelError("circulant embedding is not nonnegative definite")
    return _sample_cholesky(autocorr, n, rng)


def simulate_fgn(n: int, H: float, seed: int, backend: str = "auto", stream: int = 0) -> np.ndarray:
    """Unit-variance fractional Gaussian noise of length ``n``."""
    if not 0.0 < H < 1.0:
        raise ValueError("H must lie in (0, 1)")
    return simulate_from_autocorr(n, lambda k: fgn_autocorr(k, H), seed, backend, stream)


def simulate_fbm(n: int, H: float, seed: int, backend: str = "auto", stream: int = 0) -> SimulatedPath:
    """fBm on ``0, 1, ..., n`` started at zero."""
    noise = simulate_fgn(n, H, seed, backend, stream)
    path = np.concatenate([[0.0], np.cumsum(noise)])
    # increments are re-derived from the path so that the difference identity is exact
    return SimulatedPath(np.diff(path), path, GaussianModel.fbm(H), int(seed))


# log-spaced nodes for averaging the spectrum across the cells on the frequency axes
_AXIS_NODES = 600


def _surface_spectrum(wx, wy, ax, ay, expo):
    with np.errstate(divide="ignore"):
        return (np.abs(wx) ** (2 * ax) + np.abs(wy) ** (2 * ay)) ** expo


def _axis_cell_mean(other, step, ax, ay, expo, along_x):
    """Mean of the spectrum over ``|w| <= step/2`` in one coordinate, per value of the other."""
    u = np.concatenate([[0.0], np.geomspace(1e-9 * step, step / 2, _AXIS_NODES)])
    U, O = u[None, :], other[:, None]
    v = _surface_spectrum(U, O, ax, ay, expo) if along_x else _surface_spectrum(O, U, ax, ay, expo)
    return ((v[:, 1:] + v[:, :-1]) * np.diff(u)).sum(axis=1) / step


def simulate_surface(w: int, h: int, H_x: float, H_y: float, seed: int) -> HeightField:
    """
    Synthetic ``h`` x ``w`` surface whose rows behave like fBm with Hurst
    exponent ``H_x`` and whose columns behave like fBm with ``H_y``.

    White complex noise on a grid twice the requested size is shaped by the
    operator-scaling spectrum

        S(wx, wy) = (|wx|**(2 H_x/H) + |wy|**(2 H_y/H)) ** -(H + (H/H_x + H/H_y)/2)

    with ``H = max(H_x, H_y)``, whose restriction to a line along the x (y)
    axis has the 1D fBm spectrum ``|w|**-(2 H_x + 1)`` (``|w|**-(2 H_y + 1)``).
    For ``H_x == H_y`` it is the radial spectrum ``|w|**-(2H + 2)`` of an
    isotropic fractional field. Cells on the frequency axes are replaced by
    their cell average, because the point value there carries a spurious
    one-dimensional trend along the smoother axis. The top-left window is
    returned, standardized to zero mean and unit variance.
    """
    for H in (H_x, H_y):
        if not 0.0 < H < 1.0:
            raise ValueError("Hurst exponents must lie in (0, 1)")
    if w < 16 or h < 16:
        raise ValueError("surface must be at least 16x16")
    big_h, big_w = 2 * h, 2 * w
    H = max(H_x, H_y)
    ax, ay = H_x / H, H_y / H
    expo = -(H + (1 / ax + 1 / ay) / 2)
    wy = 2 * np.pi * np.fft.fftfreq(big_h)
    wx = 2 * np.pi * np.fft.fftfreq(big_w)
    spec = _surface_spectrum(wx[None, :], wy[:, None], ax, ay, expo)
    spec[:, 0] = _axis_cell_mean(wy, 2 * np.pi / big_w, ax, ay, expo, along_x=True)
    spec[0, :] = _axis_cell_mean(wx, 2 * np.pi / big_h, ax, ay, expo, along_x=False)
    spec[0, 0] = 0.0
    rng = make_rng(seed)
    noise = rng.standard_normal((big_h, big_w)) + 1j * rng.standard_normal((big_h, big_w))
    surf = np.fft.ifft2(np.sqrt(spec) * noise).real[:h, :w]
    surf = (surf - surf.mean()) / surf.std()
    return HeightField(surf)
