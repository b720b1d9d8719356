"""Shortest probability intervals from simulation draws.

The main entry point is :func:`spin_interval`, which sharpens the empirical
shortest interval of a set of draws by weighting the order statistics near
each endpoint and averaging those weights over bootstrap resamples.
"""

from .bench import ExperimentCell, ReplicationReport, emit_csv, emit_plots, read_csv, run_cell
from .distributions import (
    GibbsSpec,
    TestDistribution,
    exponential,
    gamma,
    gibbs_bivariate_normal,
    hpd_grid_search,
    normal,
    sample_iid,
    student_t,
    true_central,
    true_hpd,
    uniform,
)
from .empirical_intervals import empirical_central, empirical_shortest, gaussian_fit_interval, quantile
from .moments import GaussianKDE, MomentEstimates, order_stat_moments
from .qp import QpProblem, QpSolution, build_problem, solve
from .rng import DEFAULT_SEED, RngStream
from .samples import IntervalEstimate, Method, SortedSample, WeightKernel, sort_sample, weighted_endpoint
from .spin import SpinConfig, SpinError, SpinResult, augment_bounds, central_qp_interval, spin_interval

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SEED",
    "ExperimentCell",
    "GaussianKDE",
    "GibbsSpec",
    "IntervalEstimate",
    "Method",
    "MomentEstimates",
    "QpProblem",
    "QpSolution",
    "ReplicationReport",
    "RngStream",
    "SortedSample",
    "SpinConfig",
    "SpinError",
    "SpinResult",
    "TestDistribution",
    "WeightKernel",
    "augment_bounds",
    "build_problem",
    "central_qp_interval",
    "emit_csv",
    "emit_plots",
    "empirical_central",
    "empirical_shortest",
    "exponential",
    "gamma",
    "gaussian_fit_interval",
    "gibbs_bivariate_normal",
    "hpd_grid_search",
    "normal",
    "order_stat_moments",
    "quantile",
    "read_csv",
    "run_cell",
    "sample_iid",
    "solve",
    "sort_sample",
    "spin_interval",
    "student_t",
    "true_central",
    "true_hpd",
    "uniform",
    "weighted_endpoint",
]
