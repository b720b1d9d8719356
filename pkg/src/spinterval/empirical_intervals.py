"""Baseline interval estimators computed directly from sorted draws."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .samples import IntervalEstimate, Method, SortedSample

__all__ = [
    "ShortestWindow",
    "window_count",
    "quantile",
    "quantile_position",
    "empirical_shortest",
    "empirical_central",
    "central_window",
    "gaussian_fit_interval",
]


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")


def window_count(n: int, alpha: float) -> int:
    """Number of draws an interval of coverage ``1 - alpha`` must contain.

    ``ceil((1 - alpha) * n)``; the product is rounded to 9 decimals first so
    that e.g. ``0.95 * 500`` is not pushed to 476 by binary round-off.
    """
    _check_alpha(alpha)
    return int(math.ceil(round((1.0 - alpha) * n, 9)))


@dataclass(frozen=True)
class ShortestWindow:
    lower_index: int
    upper_index: int
    window_count: int

    def __post_init__(self):
        if self.upper_index - self.lower_index + 1 != self.window_count:
            raise ValueError("inconsistent window")


def quantile_position(n: int, p: float) -> float:
    """1-based fractional position ``p (n + 1)`` clipped to ``[1, n]``."""
    return min(max(p * (n + 1), 1.0), float(n))


def quantile(sample: SortedSample, p: float) -> float:
    """Empirical quantile by linear interpolation at position ``p (n + 1)``.

    This is Hyndman and Fan's type 6 rule; its plotting positions
    ``i / (n + 1)`` are the means of uniform order statistics.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    h = quantile_position(sample.n, p)
    lo = int(math.floor(h))
    frac = h - lo
    x = sample.values
    if frac == 0.0 or lo >= sample.n:
        return float(x[lo - 1])
    return float(x[lo - 1] + frac * (x[lo] - x[lo - 1]))


def empirical_shortest(
    sample: SortedSample, alpha: float
) -> tuple[IntervalEstimate, ShortestWindow]:
    """Shortest window of ``ceil((1 - alpha) n)`` consecutive order statistics.

    Ties in window length go to the smallest lower index.
    """
    k = window_count(sample.n, alpha)
    if k < 2:
        raise ValueError(
            f"alpha={alpha} with n={sample.n} leaves fewer than 2 draws in the window"
        )
    x = sample.values
    widths = x[k - 1 :] - x[: x.size - k + 1]
    j = int(np.argmin(widths))  # first minimum
    window = ShortestWindow(j + 1, j + k, k)
    interval = IntervalEstimate(
        float(x[j]), float(x[j + k - 1]), alpha, Method.EMPIRICAL_SHORTEST
    )
    return interval, window


def empirical_central(sample: SortedSample, alpha: float) -> IntervalEstimate:
    _check_alpha(alpha)
    lo = quantile(sample, alpha / 2)
    hi = quantile(sample, 1 - alpha / 2)
    return IntervalEstimate(lo, hi, alpha, Method.EMPIRICAL_CENTRAL)


def central_window(sample: SortedSample, alpha: float) -> ShortestWindow:
    """Count-based central window: the same number of draws as the shortest
    window, with the leftover draws split as evenly as possible between the
    two tails."""
    k = window_count(sample.n, alpha)
    j = (sample.n - k) // 2
    return ShortestWindow(j + 1, j + k, k)


def gaussian_fit_interval(sample: SortedSample, alpha: float) -> IntervalEstimate:
    """``mean +/- z_{1-alpha/2} sd`` with the unbiased sample sd."""
    _check_alpha(alpha)
    if sample.n < 2:
        raise ValueError("gaussian fit needs at least 2 draws")
    x = sample.values
    mean = float(np.mean(x))
    sd = float(np.std(x, ddof=1))
    if sd == 0.0:
        return IntervalEstimate(mean, mean, alpha, Method.GAUSSIAN_FIT, ("zero-variance",))
    z = float(ndtri(1 - alpha / 2))
    return IntervalEstimate(mean - z * sd, mean + z * sd, alpha, Method.GAUSSIAN_FIT)
