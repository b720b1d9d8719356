"""Reference distributions with exact shortest intervals.

``true_hpd`` solves the first-order condition ``f(l) = f(u)`` for the
excluded lower-tail mass by bracketing; ``hpd_grid_search`` is a slower
brute-force cross-check that only compares interval lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.optimize import brentq

from .rng import RngStream, as_stream
from .samples import IntervalEstimate, Method, SortedSample

__all__ = [
    "TestDistribution",
    "normal",
    "student_t",
    "gamma",
    "exponential",
    "uniform",
    "hpd_delta",
    "true_hpd",
    "true_central",
    "hpd_grid_search",
    "sample_iid",
    "gibbs_chain",
    "gibbs_bivariate_normal",
    "GibbsSpec",
]

_KINDS = ("normal", "t", "gamma", "exponential", "uniform")


@dataclass(frozen=True)
class TestDistribution:
    """A named continuous distribution.

    ``params`` are ``(mu, sigma)`` for normal, ``(df,)`` for t,
    ``(shape, scale)`` for gamma, ``(scale,)`` for exponential and ``()`` for
    the standard uniform.
    """

    __test__ = False  # not a pytest class

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    @property
    def name(self) -> str:
        if self.kind == "normal":
            mu, sigma = self.params
            return "normal" if (mu, sigma) == (0.0, 1.0) else f"normal({mu:g},{sigma:g})"
        if self.kind == "t":
            return f"t{self.params[0]:g}"
        if self.kind == "gamma":
            k, theta = self.params
            return f"gamma{k:g}" if theta == 1.0 else f"gamma({k:g},{theta:g})"
        if self.kind == "exponential":
            return "exponential" if self.params[0] == 1.0 else f"exponential({self.params[0]:g})"
        return "uniform"

    @property
    def frozen(self):
        """The matching ``scipy.stats`` frozen distribution."""
        if self.kind == "normal":
            return stats.norm(*self.params)
        if self.kind == "t":
            return stats.t(self.params[0])
        if self.kind == "gamma":
            return stats.gamma(self.params[0], scale=self.params[1])
        if self.kind == "exponential":
            return stats.expon(scale=self.params[0])
        return stats.uniform()

    @property
    def symmetric(self) -> bool:
        return self.kind in ("normal", "t", "uniform")

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.frozen.support()
        return float(lo), float(hi)

    def pdf(self, x):
        return self.frozen.pdf(x)

    def cdf(self, x):
        return self.frozen.cdf(x)

    def ppf(self, p):
        return self.frozen.ppf(p)

    def isf(self, p):
        return self.frozen.isf(p)

    def coverage(self, lower, upper):
        """Probability mass ``F(upper) - F(lower)``."""
        d = self.frozen
        return d.cdf(upper) - d.cdf(lower)


def normal(mu: float = 0.0, sigma: float = 1.0) -> TestDistribution:
    return TestDistribution("normal", (float(mu), float(sigma)))


def student_t(df: float = 5.0) -> TestDistribution:
    return TestDistribution("t", (float(df),))


def gamma(shape: float = 3.0, scale: float = 1.0) -> TestDistribution:
    return TestDistribution("gamma", (float(shape), float(scale)))


def exponential(scale: float = 1.0) -> TestDistribution:
    return TestDistribution("exponential", (float(scale),))


def uniform() -> TestDistribution:
    return TestDistribution("uniform", ())


def _check(dist: TestDistribution, alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if dist.kind == "uniform":
        raise ValueError("uniform density is flat: shortest interval is not unique")


def hpd_delta(dist: TestDistribution, alpha: float, use_symmetry: bool = True) -> float:
    """Lower-tail mass excluded by the shortest ``1 - alpha`` interval.

    The interval length ``L(D) = Q(1 - alpha + D) - Q(D)`` has derivative
    ``1/f(u) - 1/f(l)``, increasing in ``D`` for a unimodal density, so the
    minimiser is either a root of it or one of the ends ``0`` / ``alpha``.
    """
    _check(dist, alpha)
    fr = dist.frozen

    def slope(delta):
        with np.errstate(divide="ignore", invalid="ignore"):
            fl = fr.pdf(fr.ppf(delta))
            fu = fr.pdf(fr.isf(alpha - delta))
            return (1.0 / fu if fu > 0 else np.inf) - (1.0 / fl if fl > 0 else np.inf)

    if use_symmetry and dist.symmetric:
        return alpha / 2
    s0, s1 = slope(0.0), slope(alpha)
    if not s0 < 0:
        return 0.0
    if not s1 > 0:
        return alpha
    return float(brentq(slope, 0.0, alpha, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def true_hpd(dist: TestDistribution, alpha: float, use_symmetry: bool = True) -> IntervalEstimate:
    delta = hpd_delta(dist, alpha, use_symmetry)
    fr = dist.frozen
    lo = float(fr.ppf(delta))
    hi = float(fr.isf(alpha - delta))
    return IntervalEstimate(lo, hi, alpha, Method.TRUE_HPD)


def true_central(dist: TestDistribution, alpha: float) -> IntervalEstimate:
    fr = dist.frozen
    return IntervalEstimate(
        float(fr.ppf(alpha / 2)), float(fr.isf(alpha / 2)), alpha, Method.EMPIRICAL_CENTRAL
    )


def hpd_grid_search(
    dist: TestDistribution, alpha: float, step: float = 1e-6, refine: int = 2
) -> IntervalEstimate:
    """Brute-force shortest interval: scan ``D`` on a grid, then re-scan a
    finer grid around the best point ``refine`` times."""
    _check(dist, alpha)
    fr = dist.frozen
    lo, hi = 0.0, alpha
    for level in range(refine + 1):
        grid = np.arange(lo, hi + step / 2, step)
        grid = grid[(grid >= 0.0) & (grid <= alpha)]
        with np.errstate(invalid="ignore", divide="ignore"):
            length = fr.isf(alpha - grid) - fr.ppf(grid)
        length = np.where(np.isfinite(length), length, np.inf)
        j = int(np.argmin(length))
        best = grid[j]
        lo, hi = max(0.0, best - step), min(alpha, best + step)
        step /= 1000.0
    return IntervalEstimate(float(fr.ppf(best)), float(fr.isf(alpha - best)), alpha, Method.TRUE_HPD)


def sample_draws(dist: TestDistribution, n: int, rng) -> np.ndarray:
    """Unsorted i.i.d. draws."""
    rng = as_stream(rng)
    if dist.kind == "normal":
        mu, sigma = dist.params
        return mu + sigma * rng.normal(n)
    if dist.kind == "t":
        (df,) = dist.params
        z = rng.normal(n)
        chi2 = 2.0 * rng.gamma(df / 2.0, n)
        return z / np.sqrt(chi2 / df)
    if dist.kind == "gamma":
        k, theta = dist.params
        return theta * rng.gamma(k, n)
    if dist.kind == "exponential":
        return dist.params[0] * rng.exponential(n)
    return rng.uniform(n)


def sample_iid(dist: TestDistribution, n: int, seed=None) -> SortedSample:
    return SortedSample(np.sort(sample_draws(dist, n, seed)))


@dataclass(frozen=True)
class GibbsSpec:
    """First coordinate of a Gibbs chain on a standard bivariate normal."""

    rho: float = 0.9
    thin: int = 10
    burn_in: int = 100

    @property
    def name(self) -> str:
        return f"gibbs(rho={self.rho:g},thin={self.thin})"

    @property
    def marginal(self) -> TestDistribution:
        return normal()


def gibbs_chain(n_keep: int, thin: int, rho: float, seed=None, burn_in: int = 100) -> np.ndarray:
    """Kept first-coordinate states of the chain, in chain order.

    Each sweep draws ``x | y ~ N(rho y, 1 - rho^2)`` then
    ``y | x ~ N(rho x, 1 - rho^2)``, starting from the origin.  After
    ``burn_in`` sweeps, ``x`` is recorded every ``thin`` sweeps.
    """
    if not abs(rho) < 1:
        raise ValueError("|rho| must be < 1")
    if thin < 1 or n_keep < 1:
        raise ValueError("thin and n_keep must be positive")
    rng = as_stream(seed)
    sweeps = burn_in + n_keep * thin
    noise = rng.normal((sweeps, 2)) * math.sqrt(1.0 - rho * rho)
    kept = np.empty(n_keep)
    x = y = 0.0
    j = 0
    for s in range(sweeps):
        x = rho * y + noise[s, 0]
        y = rho * x + noise[s, 1]
        if s >= burn_in and (s - burn_in + 1) % thin == 0:
            kept[j] = x
            j += 1
    return kept


def gibbs_bivariate_normal(
    n_keep: int, thin: int, rho: float, seed=None, burn_in: int = 100
) -> SortedSample:
    return SortedSample(np.sort(gibbs_chain(n_keep, thin, rho, seed, burn_in)))
