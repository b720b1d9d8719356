"""Quantile-function plug-ins and approximate order-statistic moments.

For the ``i``-th of ``n`` order statistics with ``p_i = i / (n + 1)`` and
``q_i = 1 - p_i``::

    E X_(i)              ~ Q_i + p_i q_i / (2 (n + 2)) * Q''_i
    Var X_(i)            ~ p_i q_i / (n + 2) * Q'_i ** 2
    cov(X_(i), X_(j))    ~ p_i q_j / (n + 2) * Q'_i Q'_j        (i < j)

with ``Q' = 1 / f(Q)`` and ``Q'' = -f'(Q) / f(Q) ** 3``.  ``Q_i`` is the
order statistic itself and ``f`` a Gaussian kernel density estimate unless
analytic callables are supplied.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .samples import SortedSample

__all__ = [
    "GaussianKDE",
    "silverman_bandwidth",
    "kde_density_at",
    "MomentEstimates",
    "order_stat_moments",
    "density_floor",
]

_SQRT_2PI = np.sqrt(2.0 * np.pi)
# Beyond this many bandwidths a Gaussian kernel contributes < 1e-16.
_CUTOFF = 8.6


def _sorted_quantile(x: np.ndarray, p: float) -> float:
    # linear interpolation between order statistics at (n - 1) p, 0-based
    h = (x.size - 1) * p
    lo = int(h)
    hi = min(lo + 1, x.size - 1)
    return float(x[lo] + (h - lo) * (x[hi] - x[lo]))


def silverman_bandwidth(x: np.ndarray) -> float:
    """``0.9 * min(sd, IQR / 1.34) * n ** (-1/5)``; falls back to sd when the
    IQR is zero."""
    x = np.sort(np.asarray(x, dtype=float))
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    iqr = _sorted_quantile(x, 0.75) - _sorted_quantile(x, 0.25)
    spread = min(sd, iqr / 1.34)
    if spread <= 0.0:
        spread = sd
    return 0.9 * spread * x.size ** (-0.2)


class GaussianKDE:
    """Gaussian kernel density estimate with a fixed bandwidth.

    The data are kept sorted so that evaluation can skip kernels more than
    ``_CUTOFF`` bandwidths away.
    """

    def __init__(self, data, bandwidth: Optional[float] = None):
        data = np.sort(np.asarray(data, dtype=float).ravel())
        if data.size < 2:
            raise ValueError("density estimate needs at least 2 draws")
        h = silverman_bandwidth(data) if bandwidth is None else float(bandwidth)
        if not np.isfinite(h):
            raise ValueError("bandwidth is not finite")
        if not h > 0.0:
            raise ValueError("zero-variance sample: density estimate undefined")
        self.data = data
        self.bandwidth = h
        self._norm = data.size * h * _SQRT_2PI

    def _kernels(self, x: np.ndarray):
        lo = np.searchsorted(self.data, x.min() - _CUTOFF * self.bandwidth)
        hi = np.searchsorted(self.data, x.max() + _CUTOFF * self.bandwidth, "right")
        z = (x[:, None] - self.data[None, lo:hi]) / self.bandwidth
        return z, np.exp(-0.5 * z * z)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        _, k = self._kernels(x)
        return k.sum(axis=1) / self._norm

    def density_and_derivative(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        z, k = self._kernels(x)
        f = k.sum(axis=1) / self._norm
        df = -(z * k).sum(axis=1) / (self._norm * self.bandwidth)
        return f, df


def kde_density_at(sample: SortedSample, x) -> np.ndarray | float:
    """Kernel density estimate of ``sample.draws`` evaluated at ``x``."""
    f = GaussianKDE(sample.draws)(x)
    return float(f[0]) if np.ndim(x) == 0 else f


def density_floor(sample: SortedSample) -> float:
    """Lower clamp for ``f`` so that ``Q' = 1/f`` stays bounded in the tails."""
    span = float(sample.values[-1] - sample.values[0])
    return 1e-4 / span if span > 0 else 1e-4


@dataclass(frozen=True)
class MomentEstimates:
    indices: np.ndarray  # 1-based order-statistic indices of the window
    n: int
    p: np.ndarray
    q: np.ndarray
    Q: np.ndarray
    Qp: np.ndarray
    Qpp: np.ndarray
    clamped: int = 0

    def mean(self) -> np.ndarray:
        return self.Q + self.p * self.q / (2.0 * (self.n + 2)) * self.Qpp

    def variance(self) -> np.ndarray:
        return self.p * self.q / (self.n + 2) * self.Qp**2

    def covariance(self) -> np.ndarray:
        """Symmetric matrix; ``p`` of the smaller index times ``q`` of the
        larger one."""
        lo = np.minimum.outer(self.p, self.p)
        hi_q = 1.0 - np.maximum.outer(self.p, self.p)
        return lo * hi_q / (self.n + 2) * np.outer(self.Qp, self.Qp)


def order_stat_moments(
    sample: SortedSample,
    window: range | tuple[int, int],
    *,
    kde: Optional[GaussianKDE] = None,
    density: Optional[Callable] = None,
    density_derivative: Optional[Callable] = None,
    quantile: Optional[Callable] = None,
    qpp_formula: str = "standard",
) -> MomentEstimates:
    """Moment ingredients for order statistics ``window`` of ``sample``.

    Parameters
    ----------
    window
        1-based inclusive ``(start, stop)`` or a ``range``.
    kde
        Density estimate to reuse; built from ``sample.draws`` if omitted.
    density, density_derivative, quantile
        Analytic replacements for ``f``, ``f'`` and ``Q``.  When ``quantile``
        is given, ``Q_i = quantile(p_i)`` instead of ``X_(i)``.
    qpp_formula
        ``"standard"`` uses ``-f'/f**3``; ``"paper"`` uses ``Q/f**2``.
    """
    if isinstance(window, range):
        start, stop = window.start, window.stop - 1
    else:
        start, stop = window
    if not 1 <= start <= stop <= sample.n:
        raise IndexError(f"window [{start}, {stop}] outside [1, {sample.n}]")
    if qpp_formula not in ("standard", "paper"):
        raise ValueError(f"unknown qpp_formula {qpp_formula!r}")

    n = sample.n
    idx = np.arange(start, stop + 1)
    p = idx / (n + 1.0)
    q = 1.0 - p
    Q = quantile(p) if quantile is not None else sample.values[start - 1 : stop]
    Q = np.asarray(Q, dtype=float) * np.ones_like(p)

    if density is not None:
        f = np.asarray(density(Q), dtype=float) * np.ones_like(p)
        if density_derivative is not None:
            df = np.asarray(density_derivative(Q), dtype=float) * np.ones_like(p)
        else:
            df = np.zeros_like(p)
        clamped = 0
    else:
        if kde is None:
            kde = GaussianKDE(sample.draws)
        f, df = kde.density_and_derivative(Q)
        eps = density_floor(sample)
        low = f < eps
        clamped = int(low.sum())
        f = np.where(low, eps, f)

    Qp = 1.0 / f
    if qpp_formula == "standard":
        Qpp = -df / f**3
    else:
        Qpp = Q / f**2
    return MomentEstimates(idx, n, p, q, Q, Qp, Qpp, clamped)
