"""Shortest probability intervals from bootstrap-averaged optimal weights.

For each bootstrap resample of the draws, the shortest empirical window
gives a center index for each endpoint; the weight QP
(:mod:`spinterval.qp`) then gives optimal kernel weights around it.  The
weight vectors, indexed by order-statistic position, are averaged over the
resamples and applied to the original sorted draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .empirical_intervals import empirical_shortest, quantile, quantile_position
from .moments import GaussianKDE, order_stat_moments
from .qp import QpError, build_problem, default_bandwidth, kernel_window, solve
from .rng import DEFAULT_SEED, RngStream, as_stream
from .samples import MIN_DRAWS, IntervalEstimate, Method, SortedSample

__all__ = [
    "COMPAT_FLAGS",
    "SpinConfig",
    "SpinResult",
    "SpinError",
    "augment_bounds",
    "spin_interval",
    "central_qp_interval",
    "endpoint_weights",
]

COMPAT_FLAGS = frozenset({"paper-matrix", "paper-qpp"})


class SpinError(RuntimeError):
    """Too many bootstrap replicates failed to produce weights."""


@dataclass(frozen=True)
class SpinConfig:
    """Settings for :func:`spin_interval` and :func:`central_qp_interval`.

    ``bandwidth_b=None`` means ``round(sqrt(n))`` made even.  ``compat`` may
    contain ``"paper-matrix"`` (drop the second-order bias term from the
    QP) and ``"paper-qpp"`` (use ``Q/f**2`` for the second quantile
    derivative).  ``resample=False`` replaces every bootstrap resample with
    the original sample.
    """

    alpha: float = 0.05
    bootstrap_B: int = 50
    bandwidth_b: Optional[int] = None
    lower_bound: Optional[float] = None
    upper_bound: Optional[float] = None
    seed: int = DEFAULT_SEED
    compat: frozenset = field(default_factory=frozenset)
    resample: bool = True

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.bootstrap_B < 1:
            raise ValueError("bootstrap_B must be at least 1")
        if self.bandwidth_b is not None and self.bandwidth_b < 2:
            raise ValueError("bandwidth_b must be at least 2")
        compat = frozenset(self.compat)
        unknown = compat - COMPAT_FLAGS
        if unknown:
            raise ValueError(f"unknown compat flags: {sorted(unknown)}")
        object.__setattr__(self, "compat", compat)
        if (
            self.lower_bound is not None
            and self.upper_bound is not None
            and self.lower_bound >= self.upper_bound
        ):
            raise ValueError("lower_bound must be below upper_bound")


@dataclass(frozen=True)
class SpinResult:
    interval: IntervalEstimate
    lower_kernel: np.ndarray
    upper_kernel: np.ndarray
    diagnostics: dict


def augment_bounds(
    sample: SortedSample, lower: Optional[float] = None, upper: Optional[float] = None
) -> SortedSample:
    """Insert known support bounds as pseudo-datapoints."""
    if lower is None and upper is None:
        return sample
    if sample.augmented_lower is not None or sample.augmented_upper is not None:
        raise ValueError("sample is already augmented")
    x = sample.values
    if lower is not None and lower > x[0]:
        raise ValueError(f"lower bound {lower} lies inside the data range (min {x[0]})")
    if upper is not None and upper < x[-1]:
        raise ValueError(f"upper bound {upper} lies inside the data range (max {x[-1]})")
    parts = [x]
    if lower is not None:
        parts.insert(0, [float(lower)])
    if upper is not None:
        parts.append([float(upper)])
    return SortedSample(
        np.concatenate(parts),
        augmented_lower=None if lower is None else float(lower),
        augmented_upper=None if upper is None else float(upper),
    )


def _with_bounds(draws: np.ndarray, template: SortedSample) -> SortedSample:
    parts = [draws]
    if template.augmented_lower is not None:
        parts.insert(0, [template.augmented_lower])
    if template.augmented_upper is not None:
        parts.append([template.augmented_upper])
    return SortedSample(
        np.concatenate(parts) if len(parts) > 1 else draws,
        template.augmented_lower,
        template.augmented_upper,
    )


def endpoint_weights(
    sample: SortedSample,
    center_index: int,
    target: float,
    bandwidth_b: int,
    kde: Optional[GaussianKDE] = None,
    compat: frozenset = frozenset(),
):
    """Solve the weight QP for one endpoint of ``sample``.

    Returns ``(problem, solution, moments)``.
    """
    start, stop = kernel_window(center_index, bandwidth_b, sample.n)
    moments = order_stat_moments(
        sample, (start, stop), kde=kde,
        qpp_formula="paper" if "paper-qpp" in compat else "standard",
    )
    problem = build_problem(
        moments, center_index, bandwidth_b, target, sample,
        paper_matrix_form="paper-matrix" in compat,
    )
    return problem, solve(problem), moments


def _shortest_centers(sample: SortedSample, alpha: float):
    _, win = empirical_shortest(sample, alpha)
    return (
        (win.lower_index, sample[win.lower_index]),
        (win.upper_index, sample[win.upper_index]),
    )


def _central_centers(sample: SortedSample, alpha: float):
    out = []
    for p in (alpha / 2, 1 - alpha / 2):
        h = quantile_position(sample.n, p)
        center = min(max(int(math.floor(h + 0.5)), 1), sample.n)
        out.append((center, quantile(sample, p)))
    return tuple(out)


def _summary(values) -> dict:
    if not values:
        return {"min": math.nan, "mean": math.nan, "max": math.nan}
    return {"min": min(values), "mean": math.fsum(values) / len(values), "max": max(values)}


def _run(
    sample: SortedSample,
    config: SpinConfig,
    rng,
    centers: Callable,
    method: Method,
) -> SpinResult:
    sample = augment_bounds(sample, config.lower_bound, config.upper_bound) \
        if sample.augmented_lower is None and sample.augmented_upper is None else sample
    draws = sample.draws
    if draws.size < MIN_DRAWS:
        raise ValueError(f"need at least {MIN_DRAWS} draws, got {draws.size}")
    n = sample.n
    alpha = config.alpha
    b = config.bandwidth_b or default_bandwidth(n)

    if draws[0] == draws[-1]:
        c = float(draws[0])
        lo = sample.values[0] if sample.augmented_lower is not None else c
        hi = sample.values[-1] if sample.augmented_upper is not None else c
        kern = np.zeros(n)
        kern[0] = 1.0
        ukern = np.zeros(n)
        ukern[-1] = 1.0
        return SpinResult(
            IntervalEstimate(lo, hi, alpha, method, ("constant-sample",)),
            kern, ukern, {"n": n, "bandwidth_b": b, "constant_sample": True},
        )

    rng = as_stream(config.seed if rng is None else rng)
    acc = [np.zeros(n), np.zeros(n)]
    used = failed = clamped = jittered = 0
    clipped = [0, 0]
    objectives: list[list[float]] = [[], []]
    max_kkt = 0.0
    errors: list[str] = []

    for r in range(config.bootstrap_B):
        if config.resample:
            idx = rng.substream(r).integers(0, draws.size, draws.size)
            boot = _with_bounds(np.sort(draws[idx]), sample)
        else:
            boot = sample
        try:
            kde = GaussianKDE(boot.draws)
            weights = []
            for e, (center, target) in enumerate(centers(boot, alpha)):
                problem, sol, mom = endpoint_weights(boot, center, target, b, kde, config.compat)
                w = np.zeros(n)
                w[problem.start - 1 : problem.stop] = sol.weights
                weights.append((w, problem, sol, mom))
        except (QpError, ValueError, np.linalg.LinAlgError) as exc:
            failed += 1
            errors.append(f"{type(exc).__name__}: {exc}")
            continue
        used += 1
        for e, (w, problem, sol, mom) in enumerate(weights):
            acc[e] += w
            clipped[e] += problem.clipped
            objectives[e].append(problem.mse(sol.weights))
            clamped += mom.clamped
            jittered += problem.jittered
            max_kkt = max(max_kkt, sol.kkt_residual)

    if failed * 2 > config.bootstrap_B or used == 0:
        raise SpinError(
            f"{failed} of {config.bootstrap_B} bootstrap replicates failed"
            + (f"; last error: {errors[-1]}" if errors else "")
        )

    kernels = [a / a.sum() for a in acc]
    lower = float(kernels[0] @ sample.values)
    upper = float(kernels[1] @ sample.values)
    notes = ()
    if lower > upper:
        lower = upper = 0.5 * (lower + upper)
        notes = ("crossed-endpoints",)
    diagnostics = {
        "n": n,
        "bandwidth_b": b,
        "bootstrap_used": used,
        "failed_replicates": failed,
        "clamped_density_count": clamped,
        "jittered_ties": jittered,
        "clipped_windows": {"lower": clipped[0], "upper": clipped[1]},
        "objective": {"lower": _summary(objectives[0]), "upper": _summary(objectives[1])},
        "max_kkt_residual": max_kkt,
        "augmented": [v for v in (sample.augmented_lower, sample.augmented_upper) if v is not None],
    }
    if errors:
        diagnostics["errors"] = errors
    return SpinResult(
        IntervalEstimate(lower, upper, alpha, method, notes),
        kernels[0], kernels[1], diagnostics,
    )


def spin_interval(
    sample: SortedSample, config: SpinConfig = SpinConfig(), rng: Optional[RngStream] = None
) -> SpinResult:
    """Shortest probability interval with bootstrap-averaged QP weights.

    ``rng`` overrides ``config.seed``; bootstrap replicate ``r`` draws its
    resample from ``rng.substream(r)``, so the result does not depend on
    the order in which replicates are processed.
    """
    return _run(sample, config, rng, _shortest_centers, Method.SPIN)


def central_qp_interval(
    sample: SortedSample, config: SpinConfig = SpinConfig(), rng: Optional[RngStream] = None
) -> SpinResult:
    """Central interval refined by the same weighting: kernels centred on
    the ``alpha/2`` and ``1 - alpha/2`` quantile positions, targeting the
    interpolated empirical quantiles."""
    return _run(sample, config, rng, _central_centers, Method.CENTRAL_QP)
