"""Look inside one endpoint optimisation.

Builds the quadratic program for the lower endpoint of a single sample and
solves it with both solvers.  The optimal weights form a triangle centred
on the empirical endpoint.
"""

import numpy as np

from spinterval import SortedSample, build_problem, empirical_shortest, order_stat_moments, solve
from spinterval.qp import default_bandwidth, format_problem, kernel_window

rng = np.random.default_rng(5)
sample = SortedSample(np.sort(rng.standard_normal(200)))
_, window = empirical_shortest(sample, 0.05)
center = window.lower_index
b = default_bandwidth(sample.n)
start, stop = kernel_window(center, b, sample.n)

moments = order_stat_moments(sample, (start, stop))
problem = build_problem(moments, center, b, sample[center], sample)

fast = solve(problem)
dense = solve(problem, method="dense")
print(f"window {start}..{stop} around order statistic {center}, b={b}")
print(f"objective  reduced={fast.objective:.10f}  dense={dense.objective:.10f}")
print(f"KKT residual {fast.kkt_residual:.2e}")
bars = (fast.weights / fast.weights.max() * 40).round().astype(int)
for i, (w, n) in enumerate(zip(fast.weights, bars), start=start):
    print(f"{i:4d} {w:8.5f} {'#' * n}")

# The full matrices, for pasting into another solver.
print(format_problem(problem, fast).splitlines()[0])
