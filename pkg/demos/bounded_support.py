"""Intervals for a quantity with a known lower bound.

For exponential draws the shortest interval starts at zero.  Passing the
bound lets Spin place weight on it as a pseudo-draw, so the lower endpoint
sits at the boundary instead of at the smallest draw.
"""

from spinterval import SpinConfig, exponential, sample_iid, spin_interval, true_hpd

dist = exponential()
truth = true_hpd(dist, 0.05)
sample = sample_iid(dist, 500, seed=11)

free = spin_interval(sample, SpinConfig(seed=11))
bounded = spin_interval(sample, SpinConfig(seed=11, lower_bound=0.0))

print(f"true interval     [{truth.lower:.4f}, {truth.upper:.4f}]")
print(f"without bound     [{free.interval.lower:.4f}, {free.interval.upper:.4f}]")
print(f"with bound at 0   [{bounded.interval.lower:.4f}, {bounded.interval.upper:.4f}]")
print(f"smallest draw     {sample.values[0]:.4f}")
