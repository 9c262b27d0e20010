"""
Closed-form quantities for Gaussian processes with stationary increments:
fractional Brownian motion, increments with Cauchy-class correlation, the
Gaussian change-probability formula and variance-scaling Hurst exponents.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GaussianModel",
    "fbm_cov",
    "fgn_autocorr",
    "fgn_autocorr_asymptote",
    "change_prob_from_cov",
    "fbm_change_prob",
    "hurst_of_delay_from_variance",
    "cauchy_increment_autocorr",
    "variance_from_autocorr",
    "theorem1_h_of_delay",
]

_RADICAND_SLACK = 1e-12


def _check_hurst(H):
    if not 0.0 < H < 1.0:
        raise ValueError(f"Hurst exponent must lie in (0, 1), got {H}")


def fbm_cov(s, t, H):
    """Covariance ``(s**2H + t**2H - |t - s|**2H) / 2`` of standard fBm."""
    _check_hurst(H)
    s = np.asarray(s, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if np.any(s < 0) or np.any(t < 0):
        raise ValueError("fBm times must be non-negative")
    out = 0.5 * (s ** (2 * H) + t ** (2 * H) - np.abs(t - s) ** (2 * H))
    # X_0 = 0, so the covariance vanishes exactly rather than up to rounding
    out = np.where((s == 0) | (t == 0), 0.0, out)
    return float(out) if out.ndim == 0 else out


def fgn_autocorr(tau, H):
    """Autocorrelation of fractional Gaussian noise at integer lag ``tau``."""
    _check_hurst(H)
    k = np.abs(np.asarray(tau, dtype=np.float64))
    h2 = 2 * H
    out = 0.5 * ((k + 1) ** h2 - 2 * k ** h2 + np.abs(k - 1) ** h2)
    return float(out) if out.ndim == 0 else out


def fgn_autocorr_asymptote(tau, H):
    """Large-lag approximation ``H (2H - 1) tau**(2H - 2)`` of :func:`fgn_autocorr`."""
    _check_hurst(H)
    k = np.asarray(tau, dtype=np.float64)
    out = H * (2 * H - 1) * k ** (2 * H - 2)
    return float(out) if out.ndim == 0 else out


def change_prob_from_cov(cov_inc: float, var1: float, var2: float) -> float:
    """
    Change probability of a zero-mean Gaussian process from the moments of
    its two consecutive increments ``X_tau - X_0`` and ``X_2tau - X_tau``.

    Parameters
    ----------
    cov_inc : float
        Covariance of the two increments.
    var1, var2 : float
        Variances of the first and second increment.
    """
    if not (var1 > 0 and var2 > 0):
        raise ValueError("increment variances must be positive")
    radicand = cov_inc / (2.0 * math.sqrt(var1 * var2)) + 0.5
    if radicand < -_RADICAND_SLACK or radicand > 1 + _RADICAND_SLACK:
        raise ValueError(f"invalid covariance triple (radicand {radicand})")
    radicand = min(max(radicand, 0.0), 1.0)
    return 1.0 - (2.0 / math.pi) * math.asin(math.sqrt(radicand))


def fbm_change_prob(H: float) -> float:
    """Change probability of fBm, ``1 - (2/pi) arcsin(2**(H - 1))``, for every delay."""
    _check_hurst(H)
    return 1.0 - (2.0 / math.pi) * math.asin(2.0 ** (H - 1.0))


def hurst_of_delay_from_variance(var_tau: float, var_2tau: float) -> float:
    """``log2(Var(X_2tau) / Var(X_tau)) / 2``."""
    if not (var_tau > 0 and var_2tau > 0):
        raise ValueError("variances must be positive")
    return 0.5 * math.log2(var_2tau / var_tau)


def cauchy_increment_autocorr(tau, alpha: float, beta: float):
    """Cauchy-class correlation ``(1 + |tau|**alpha) ** (-beta / alpha)``."""
    if not 0.0 < alpha <= 2.0:
        raise ValueError("alpha must lie in (0, 2]")
    if not 0.0 < beta < 2.0:
        raise ValueError("beta must lie in (0, 2)")
    k = np.abs(np.asarray(tau, dtype=np.float64))
    out = (1.0 + k ** alpha) ** (-beta / alpha)
    return float(out) if out.ndim == 0 else out


def _evaluate(autocorr, lags: np.ndarray) -> np.ndarray:
    """Call ``autocorr`` on an array of lags, falling back to one call per lag."""
    try:
        c = np.asarray(autocorr(lags), dtype=np.float64)
        if c.shape == lags.shape:
            return c
    except (TypeError, ValueError):
        pass
    return np.array([float(autocorr(int(k))) for k in lags], dtype=np.float64)


def variance_from_autocorr(n: int, autocorr, var1: float = 1.0) -> float:
    """
    ``Var(X_n) = Var(X_1) * (n + 2 * sum_{k=1}^{n-1} (n - k) c(k))`` for a
    process with stationary increments of autocorrelation ``c``.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if not var1 > 0:
        raise ValueError("var1 must be positive")
    k = np.arange(1, n, dtype=np.float64)
    terms = (n - k) * _evaluate(autocorr, k) if n > 1 else np.empty(0)
    total = var1 * (n + 2.0 * math.fsum(terms))
    if not total > 0:
        raise ValueError(f"autocorrelation gives non-positive variance at n={n}")
    return total


@dataclass(frozen=True)
class GaussianModel:
    """
    Stationary-increment Gaussian process.

    ``kind="fbm"`` uses Hurst exponent ``H``; ``kind="cauchy"`` uses the
    Cauchy-class increment correlation with ``alpha`` and ``beta`` whose
    Hurst exponent is ``1 - beta/2``.
    """

    kind: str = "fbm"
    H: float = 0.5
    alpha: float = 2.0
    beta: float = 1.0
    var1: float = 1.0

    def __post_init__(self):
        if self.kind == "fbm":
            _check_hurst(self.H)
        elif self.kind == "cauchy":
            cauchy_increment_autocorr(0, self.alpha, self.beta)
        else:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not self.var1 > 0:
            raise ValueError("var1 must be positive")

    @classmethod
    def fbm(cls, H: float, var1: float = 1.0) -> "GaussianModel":
        return cls("fbm", H=H, var1=var1)

    @classmethod
    def cauchy(cls, alpha: float, beta: float, var1: float = 1.0) -> "GaussianModel":
        return cls("cauchy", H=1.0 - beta / 2.0, alpha=alpha, beta=beta, var1=var1)

    @property
    def hurst(self) -> float:
        return self.H if self.kind == "fbm" else 1.0 - self.beta / 2.0

    def autocorr(self, tau):
        if self.kind == "fbm":
            return fgn_autocorr(tau, self.H)
        return cauchy_increment_autocorr(tau, self.alpha, self.beta)

    def variance(self, n: int) -> float:
        return variance_from_autocorr(n, self.autocorr, self.var1)


def theorem1_h_of_delay(model: GaussianModel, tau: int) -> float:
    """Hurst exponent of delay ``tau`` from the exact variances ``Var(X_tau)``, ``Var(X_2tau)``."""
    if tau < 1:
        raise ValueError("tau must be a positive integer")
    return hurst_of_delay_from_variance(model.variance(tau), model.variance(2 * tau))
