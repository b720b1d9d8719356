"""Central (equal-tailed) intervals: plain quantiles against QP-weighted ones.

The same weighting machinery that sharpens shortest intervals also applies
to fixed quantiles.  A parametric normal fit is shown for contrast on a
skewed distribution, where it is badly off.
"""

from spinterval import (
    SpinConfig,
    central_qp_interval,
    empirical_central,
    gamma,
    gaussian_fit_interval,
    sample_iid,
    true_central,
)

dist = gamma(3)
sample = sample_iid(dist, 500, seed=3)
truth = true_central(dist, 0.05)

rows = [
    ("true central", truth),
    ("empirical quantiles", empirical_central(sample, 0.05)),
    ("central-QP", central_qp_interval(sample, SpinConfig(seed=3)).interval),
    ("normal fit", gaussian_fit_interval(sample, 0.05)),
]
for name, est in rows:
    print(f"{name:<20} [{est.lower:.4f}, {est.upper:.4f}]")
