"""Data model for simulation draws and interval estimates.

Order-statistic indices are 1-based everywhere in the public API, so
``X_(1)`` is the sample minimum and ``X_(n)`` the maximum.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "MIN_DRAWS",
    "Method",
    "SortedSample",
    "IntervalEstimate",
    "WeightKernel",
    "sort_sample",
    "weighted_endpoint",
]

# Smallest sample the weighted (QP-based) estimators accept.
MIN_DRAWS = 10


class Method(str, enum.Enum):
    EMPIRICAL_SHORTEST = "shortest"
    EMPIRICAL_CENTRAL = "central"
    SPIN = "spin"
    CENTRAL_QP = "central-qp"
    GAUSSIAN_FIT = "gaussian"
    TRUE_HPD = "true-hpd"


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=float)
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class SortedSample:
    """Ascending draws, optionally augmented with support bounds.

    ``augmented_lower`` / ``augmented_upper`` record pseudo-datapoints that
    were inserted at a known boundary of the support; they are part of
    ``values`` but not of :attr:`draws`.
    """

    values: np.ndarray
    augmented_lower: Optional[float] = None
    augmented_upper: Optional[float] = None

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1:
            raise ValueError("draws must be one-dimensional")
        if values.size == 0:
            raise ValueError("sample is empty")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample contains non-finite values")
        if np.any(np.diff(values) < 0):
            raise ValueError("values must be non-decreasing; use sort_sample()")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def draws(self) -> np.ndarray:
        """The genuine draws, without boundary pseudo-datapoints."""
        lo = 1 if self.augmented_lower is not None else 0
        hi = self.n - 1 if self.augmented_upper is not None else self.n
        return self.values[lo:hi]

    def __getitem__(self, i: int) -> float:
        """Order statistic ``X_(i)`` with 1-based ``i``."""
        if not 1 <= i <= self.n:
            raise IndexError(f"order statistic index {i} outside [1, {self.n}]")
        return float(self.values[i - 1])

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class IntervalEstimate:
    lower: float
    upper: float
    alpha: float
    method: Method
    notes: tuple = ()

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.lower > self.upper:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")
        object.__setattr__(self, "method", Method(self.method))

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def as_tuple(self) -> tuple[float, float]:
        return (self.lower, self.upper)


@dataclass(frozen=True)
class WeightKernel:
    """Weights over the order statistics ``start..stop`` (1-based, inclusive).

    The profile must sum to one, be nonnegative and be unimodal with its
    peak at ``center_index``.
    """

    center_index: int
    start: int
    stop: int
    weights: np.ndarray
    bandwidth_b: int = 0
    tol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        w = _frozen(self.weights)
        object.__setattr__(self, "weights", w)
        if self.stop - self.start + 1 != w.size:
            raise ValueError(
                f"window [{self.start}, {self.stop}] does not match {w.size} weights"
            )
        if not self.start <= self.center_index <= self.stop:
            raise ValueError("center_index outside the window")
        if abs(w.sum() - 1.0) > 1e-10:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        if np.any(w < -1e-10):
            raise ValueError("weights must be nonnegative")
        c = self.center_index - self.start
        rising = np.diff(w[: c + 1])
        falling = np.diff(w[c:])
        if np.any(rising < -self.tol) or np.any(falling > self.tol):
            raise ValueError("weights are not unimodal around center_index")

    @property
    def window(self) -> range:
        return range(self.start, self.stop + 1)

    @classmethod
    def point_mass(cls, index: int) -> "WeightKernel":
        return cls(index, index, index, np.ones(1))

    @classmethod
    def uniform(cls, n: int) -> "WeightKernel":
        return cls((n + 1) // 2, 1, n, np.full(n, 1.0 / n))


def sort_sample(raw) -> SortedSample:
    """Validate raw draws and return them as an ascending :class:`SortedSample`."""
    arr = np.asarray(raw, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("no draws supplied")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise ValueError(
            f"{bad.size} non-finite draw(s), first at position {bad[0]}: {arr[bad[0]]}"
        )
    return SortedSample(np.sort(arr, kind="stable"))


def weighted_endpoint(sample: SortedSample, kernel: WeightKernel) -> float:
    """Return ``sum_i w_i X_(i)`` over the kernel's window."""
    if kernel.start < 1 or kernel.stop > sample.n:
        raise IndexError(
            f"kernel window [{kernel.start}, {kernel.stop}] outside [1, {sample.n}]"
        )
    x = sample.values[kernel.start - 1 : kernel.stop]
    return float(np.dot(kernel.weights, x))
