"""Replication harness: endpoint RMSE, bias, variance, coverage, efficiency.

Each replication draws a fresh sample, runs every requested estimator and
records endpoint errors against the exact shortest interval of the
generating distribution, plus the exact coverage ``F(u) - F(l)``.
Replication ``r`` of a cell uses ``RngStream(cell.seed).substream(r)``, and
all sums are taken with :func:`math.fsum`, so a report does not depend on
how replications are split across worker processes.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .distributions import GibbsSpec, TestDistribution, gibbs_chain, sample_draws, true_hpd
from .empirical_intervals import empirical_central, empirical_shortest, gaussian_fit_interval
from .rng import DEFAULT_SEED, RngStream
from .samples import IntervalEstimate, Method, SortedSample
from .spin import SpinConfig, SpinError, augment_bounds, central_qp_interval, spin_interval

__all__ = [
    "BenchError",
    "ExperimentCell",
    "EndpointStats",
    "MethodStats",
    "ReplicationReport",
    "run_cell",
    "run_grid",
    "CSV_COLUMNS",
    "RAW_COLUMNS",
    "emit_csv",
    "read_csv",
    "dump_raw",
    "read_raw",
    "emit_plots",
]

CSV_COLUMNS = (
    "cell_id", "dist", "n", "alpha", "method", "endpoint", "rmse", "bias",
    "variance", "coverage_mean", "efficiency", "mc_stderr_rmse", "failures",
)
RAW_COLUMNS = ("cell_id", "replicate", "method", "endpoint", "estimate", "truth", "error")
ENDPOINTS = ("lower", "upper")
MAX_FAILURE_RATE = 0.01


class BenchError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentCell:
    dist: Union[TestDistribution, GibbsSpec]
    n: int
    alpha: float = 0.05
    replications: int = 2000
    methods: tuple = (Method.EMPIRICAL_SHORTEST, Method.SPIN)
    seed: int = DEFAULT_SEED
    lower_bound: Optional[float] = None
    upper_bound: Optional[float] = None
    bootstrap_B: int = 50
    bandwidth_b: Optional[int] = None
    compat: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be positive")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        methods = tuple(Method(m) for m in self.methods)
        if not methods:
            raise ValueError("no methods requested")
        object.__setattr__(self, "methods", methods)
        object.__setattr__(self, "compat", frozenset(self.compat))

    @property
    def cell_id(self) -> str:
        parts = [self.dist.name, f"n{self.n}", f"a{self.alpha:g}"]
        if self.lower_bound is not None:
            parts.append(f"lb{self.lower_bound:g}")
        if self.upper_bound is not None:
            parts.append(f"ub{self.upper_bound:g}")
        return "-".join(parts)

    @property
    def target(self) -> TestDistribution:
        """Distribution whose shortest interval the estimators aim at."""
        return self.dist.marginal if isinstance(self.dist, GibbsSpec) else self.dist

    def spin_config(self) -> SpinConfig:
        return SpinConfig(
            alpha=self.alpha, bootstrap_B=self.bootstrap_B, bandwidth_b=self.bandwidth_b,
            lower_bound=self.lower_bound, upper_bound=self.upper_bound,
            seed=self.seed, compat=self.compat,
        )

    def draw(self, rng: RngStream) -> np.ndarray:
        if isinstance(self.dist, GibbsSpec):
            g = self.dist
            return gibbs_chain(self.n, g.thin, g.rho, rng, g.burn_in)
        return sample_draws(self.dist, self.n, rng)


def _estimate(method: Method, sample: SortedSample, cell: ExperimentCell, rng: RngStream):
    alpha = cell.alpha
    if method is Method.EMPIRICAL_SHORTEST:
        return empirical_shortest(sample, alpha)[0]
    if method is Method.EMPIRICAL_CENTRAL:
        return empirical_central(sample, alpha)
    if method is Method.GAUSSIAN_FIT:
        return gaussian_fit_interval(sample, alpha)
    config = cell.spin_config()
    if method is Method.SPIN:
        return spin_interval(sample, config, rng.substream(1)).interval
    if method is Method.CENTRAL_QP:
        return central_qp_interval(sample, config, rng.substream(2)).interval
    raise ValueError(f"method {method} cannot be benchmarked")


def _replicates(cell: ExperimentCell, reps: range) -> np.ndarray:
    """Estimates with shape ``(len(reps), n_methods, 2)``; NaN marks failure."""
    out = np.full((len(reps), len(cell.methods), 2), np.nan)
    root = RngStream(cell.seed)
    for row, r in enumerate(reps):
        rng = root.substream(r)
        sample = SortedSample(np.sort(cell.draw(rng.substream(0))))
        sample = augment_bounds(sample, cell.lower_bound, cell.upper_bound)
        for k, method in enumerate(cell.methods):
            try:
                est = _estimate(method, sample, cell, rng)
            except (SpinError, ValueError, ArithmeticError):
                continue
            out[row, k] = est.lower, est.upper
    return out


def _chunks(total: int, parts: int) -> list[range]:
    parts = max(1, min(parts, total))
    edges = np.linspace(0, total, parts + 1).round().astype(int)
    return [range(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _mean(x: np.ndarray) -> float:
    return math.fsum(x) / x.size if x.size else math.nan


def _se_of_mean(x: np.ndarray) -> float:
    if x.size < 2:
        return math.nan
    m = _mean(x)
    return math.sqrt(math.fsum((x - m) ** 2) / (x.size - 1) / x.size)


def _ratio_se(a: np.ndarray, b: np.ndarray) -> float:
    """Delta-method standard error of ``mean(a) / mean(b)`` for paired data."""
    n = a.size
    if n < 2:
        return math.nan
    ma, mb = _mean(a), _mean(b)
    if mb == 0:
        return math.nan
    da, db = a - ma, b - mb
    va = math.fsum(da * da) / (n - 1)
    vb = math.fsum(db * db) / (n - 1)
    cab = math.fsum(da * db) / (n - 1)
    var = (va / mb**2 - 2 * ma * cab / mb**3 + ma**2 * vb / mb**4) / n
    return math.sqrt(max(var, 0.0))


@dataclass(frozen=True)
class EndpointStats:
    """Error summary for one endpoint; ``mse == bias**2 + variance``."""

    bias: float
    variance: float
    se_bias: float
    se_variance: float
    se_mse: float
    count: int

    @property
    def mse(self) -> float:
        return self.bias**2 + self.variance

    @property
    def rmse(self) -> float:
        return math.sqrt(self.mse)

    @property
    def se_rmse(self) -> float:
        return self.se_mse / (2 * self.rmse) if self.rmse > 0 else math.nan

    @classmethod
    def from_errors(cls, e: np.ndarray) -> "EndpointStats":
        if e.size == 0:
            return cls(math.nan, math.nan, math.nan, math.nan, math.nan, 0)
        bias = _mean(e)
        dev2 = (e - bias) ** 2
        return cls(bias, _mean(dev2), _se_of_mean(e), _se_of_mean(dev2), _se_of_mean(e * e), e.size)


@dataclass(frozen=True)
class MethodStats:
    method: Method
    lower: EndpointStats
    upper: EndpointStats
    coverage_mean: float
    coverage_se: float
    failures: int
    efficiency_lower: float = math.nan
    efficiency_upper: float = math.nan
    efficiency: float = math.nan
    efficiency_se: float = math.nan

    @property
    def mse_total(self) -> float:
        return self.lower.mse + self.upper.mse

    @property
    def rmse_total(self) -> float:
        return math.sqrt(self.mse_total)

    @property
    def se_rmse_total(self) -> float:
        se = math.hypot(self.lower.se_mse, self.upper.se_mse)
        return se / (2 * self.rmse_total) if self.rmse_total > 0 else math.nan

    def endpoint(self, which: str) -> EndpointStats:
        return self.lower if which == "lower" else self.upper


@dataclass(frozen=True)
class ReplicationReport:
    cell: ExperimentCell
    truth: IntervalEstimate
    estimates: np.ndarray  # (replications, n_methods, 2)
    coverage: np.ndarray  # (replications, n_methods)
    stats: dict

    @property
    def cell_id(self) -> str:
        return self.cell.cell_id

    def __getitem__(self, method) -> MethodStats:
        return self.stats[Method(method)]

    def errors(self, method) -> np.ndarray:
        k = self.cell.methods.index(Method(method))
        return self.estimates[:, k, :] - np.array(self.truth.as_tuple())


def _summarise(cell: ExperimentCell, truth: IntervalEstimate, est: np.ndarray):
    truth_arr = np.array(truth.as_tuple())
    target = cell.target
    cov = np.full(est.shape[:2], np.nan)
    ok = ~np.isnan(est).any(axis=2)
    cov[ok] = target.coverage(est[..., 0][ok], est[..., 1][ok])

    base_k = (
        cell.methods.index(Method.EMPIRICAL_SHORTEST)
        if Method.EMPIRICAL_SHORTEST in cell.methods else None
    )
    stats = {}
    for k, method in enumerate(cell.methods):
        good = ok[:, k]
        err = est[good, k, :] - truth_arr
        lower = EndpointStats.from_errors(err[:, 0])
        upper = EndpointStats.from_errors(err[:, 1])
        extra = {}
        if base_k is not None:
            both = good & ok[:, base_k]
            e_m = est[both, k, :] - truth_arr
            e_b = est[both, base_k, :] - truth_arr
            sq_m, sq_b = e_m**2, e_b**2
            eff = []
            for j in range(2):
                den = _mean(sq_m[:, j])
                eff.append(_mean(sq_b[:, j]) / den if den > 0 else math.nan)
            tot_m, tot_b = sq_m.sum(axis=1), sq_b.sum(axis=1)
            den = _mean(tot_m)
            extra = dict(
                efficiency_lower=eff[0],
                efficiency_upper=eff[1],
                efficiency=_mean(tot_b) / den if den > 0 else math.nan,
                efficiency_se=_ratio_se(tot_b, tot_m),
            )
        c = cov[good, k]
        stats[method] = MethodStats(
            method, lower, upper, _mean(c), _se_of_mean(c), int((~good).sum()), **extra
        )
    return cov, stats


def run_cell(cell: ExperimentCell, workers: int = 1) -> ReplicationReport:
    """Run all replications of ``cell`` and aggregate them.

    Raises :class:`BenchError` if any method fails on more than 1% of the
    replications.
    """
    truth = true_hpd(cell.target, cell.alpha)
    chunks = _chunks(cell.replications, workers)
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_replicates, [cell] * len(chunks), chunks))
    else:
        parts = [_replicates(cell, ch) for ch in chunks]
    est = np.concatenate(parts, axis=0)
    cov, stats = _summarise(cell, truth, est)
    for method, st in stats.items():
        if st.failures > MAX_FAILURE_RATE * cell.replications:
            raise BenchError(
                f"{cell.cell_id}: {method.value} failed on {st.failures} of "
                f"{cell.replications} replications"
            )
    return ReplicationReport(cell, truth, est, cov, stats)


def run_grid(cells: Sequence[ExperimentCell], workers: int = 1) -> list[ReplicationReport]:
    return [run_cell(c, workers) for c in cells]


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def emit_csv(reports: Sequence[ReplicationReport], path) -> None:
    """One row per (cell, method, endpoint) plus a ``both`` row per method.

    The ``both`` row holds ``sqrt(mse_lower + mse_upper)`` as rmse, the
    summed variance, the summed-MSE efficiency and ``nan`` bias.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rep in reports:
            cell = rep.cell
            for method in cell.methods:
                st = rep[method]
                head = [cell.cell_id, cell.dist.name, cell.n, cell.alpha, method.value]
                for which, eff in (("lower", st.efficiency_lower), ("upper", st.efficiency_upper)):
                    ep = st.endpoint(which)
                    w.writerow([_fmt(v) for v in head] + [which] + [_fmt(v) for v in (
                        ep.rmse, ep.bias, ep.variance, st.coverage_mean, eff,
                        ep.se_rmse, st.failures)])
                w.writerow([_fmt(v) for v in head] + ["both"] + [_fmt(v) for v in (
                    st.rmse_total, math.nan, st.lower.variance + st.upper.variance,
                    st.coverage_mean, st.efficiency, st.se_rmse_total, st.failures)])


_INT_COLUMNS = {"n", "failures", "replicate"}
_STR_COLUMNS = {"cell_id", "dist", "method", "endpoint"}


def _parse_rows(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = []
        for row in csv.DictReader(fh):
            rows.append({
                k: (v if k in _STR_COLUMNS else int(v) if k in _INT_COLUMNS else float(v))
                for k, v in row.items()
            })
        return rows


def read_csv(path) -> list[dict]:
    return _parse_rows(path)


def dump_raw(reports: Sequence[ReplicationReport], path) -> None:
    """Per-replicate estimates: one row per (replicate, method, endpoint)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_COLUMNS)
        for rep in reports:
            truth = rep.truth.as_tuple()
            for r in range(rep.estimates.shape[0]):
                for k, method in enumerate(rep.cell.methods):
                    for j, which in enumerate(ENDPOINTS):
                        e = rep.estimates[r, k, j]
                        w.writerow([rep.cell_id, r, method.value, which,
                                    _fmt(e), _fmt(truth[j]), _fmt(e - truth[j])])


def read_raw(path) -> list[dict]:
    return _parse_rows(path)


def emit_plots(reports: Sequence[ReplicationReport], outdir) -> list[str]:
    """Write efficiency, bias-variance and coverage charts as SVG files."""
    from . import plots

    return plots.write_all(reports, outdir)
