import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from spinterval.distributions import gamma, sample_iid, true_hpd
from spinterval.empirical_intervals import (
    central_window,
    empirical_central,
    empirical_shortest,
    gaussian_fit_interval,
    quantile,
    window_count,
)
from spinterval.samples import sort_sample

from oracles import brute_force_shortest, type6_quantile

alphas = st.sampled_from([0.05, 0.1, 0.2, 0.5])
draws = arrays(float, st.integers(10, 60), elements=st.floats(-1e3, 1e3, allow_nan=False))


def test_window_count_avoids_roundoff():
    assert window_count(500, 0.05) == 475
    assert window_count(5, 0.2) == 4
    assert window_count(101, 0.05) == 96


def test_shortest_five_point_example():
    est, win = empirical_shortest(sort_sample([0, 1, 2, 3, 10]), 0.2)
    assert est.as_tuple() == (0.0, 3.0)
    assert (win.lower_index, win.upper_index, win.window_count) == (1, 4, 4)


def test_shortest_tie_goes_to_first_window():
    est, win = empirical_shortest(sort_sample([0, 1, 2, 3]), 0.5)
    assert win.lower_index == 1
    assert est.as_tuple() == (0.0, 1.0)


def test_shortest_symmetric_unimodal_sample():
    # normal scores: exactly symmetric with spacings growing into both tails
    x = stats.norm.ppf(np.arange(1, 401) / 401)
    est, _ = empirical_shortest(sort_sample(x), 0.1)
    assert abs(est.lower) == pytest.approx(abs(est.upper), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(arrays(float, st.integers(5, 40), elements=st.floats(0, 1e3, allow_nan=False)), alphas)
def test_shortest_on_mirrored_sample_has_mirrored_twin(half, alpha):
    s = sort_sample(np.concatenate([-half, half]))
    est, _ = empirical_shortest(s, alpha)
    mirrored, _ = empirical_shortest(sort_sample(-s.values[::-1]), alpha)
    assert mirrored.length == pytest.approx(est.length, rel=1e-12, abs=1e-12)


def test_shortest_large_normal_sample():
    est, _ = empirical_shortest(sample_iid_normal(10_000), 0.05)
    assert est.lower == pytest.approx(-1.959964, abs=0.15)
    assert est.upper == pytest.approx(1.959964, abs=0.15)


def sample_iid_normal(n, seed=3):
    from spinterval.distributions import normal

    return sample_iid(normal(), n, seed)


def test_central_example_values():
    # Position p (n + 1) gives 5.05 and 95.95 for 1..100 at alpha 0.1.
    s = sort_sample(np.arange(1, 101))
    est = empirical_central(s, 0.10)
    assert est.lower == pytest.approx(5.05, abs=1e-12)
    assert est.upper == pytest.approx(95.95, abs=1e-12)
    assert est.lower == pytest.approx(type6_quantile(range(1, 101), 0.05), abs=1e-12)


def test_central_constant_sample():
    est = empirical_central(sort_sample([4.0] * 12), 0.05)
    assert est.as_tuple() == (4.0, 4.0)


def test_central_large_normal_sample():
    est = empirical_central(sample_iid_normal(10_000), 0.05)
    assert est.lower == pytest.approx(-1.959964, abs=0.15)
    assert est.upper == pytest.approx(1.959964, abs=0.15)


def test_quantile_clips_to_extremes():
    s = sort_sample([1.0, 2.0, 3.0])
    assert quantile(s, 0.0) == 1.0
    assert quantile(s, 1.0) == 3.0
    with pytest.raises(ValueError):
        quantile(s, 1.5)


def test_gaussian_fit_standardised_sample():
    z = np.random.default_rng(4).standard_normal(50)
    z = (z - z.mean()) / z.std(ddof=1)
    est = gaussian_fit_interval(sort_sample(z), 0.05)
    assert est.lower == pytest.approx(-1.959964, abs=1e-6)
    assert est.upper == pytest.approx(1.959964, abs=1e-6)


def test_gaussian_fit_zero_variance_flagged():
    est = gaussian_fit_interval(sort_sample([2.0] * 10), 0.05)
    assert est.as_tuple() == (2.0, 2.0)
    assert "zero-variance" in est.notes


def test_gaussian_fit_misses_gamma_asymmetry():
    dist = gamma(3)
    est = gaussian_fit_interval(sample_iid(dist, 20_000, 8), 0.05)
    truth = true_hpd(dist, 0.05)
    # symmetric fit pushes the lower end well below the true lower endpoint
    assert truth.lower - est.lower > 0.4


@settings(max_examples=300, deadline=None)
@given(draws, alphas)
def test_shortest_matches_exhaustive_scan(x, alpha):
    s = sort_sample(x)
    est, _ = empirical_shortest(s, alpha)
    assert est.as_tuple() == brute_force_shortest(s.values, alpha)


@settings(max_examples=300, deadline=None)
@given(draws, st.floats(0, 1))
def test_quantile_matches_scalar_oracle(x, p):
    s = sort_sample(x)
    assert quantile(s, p) == pytest.approx(type6_quantile(x, p), rel=1e-12, abs=1e-9)


@settings(max_examples=300, deadline=None)
@given(draws, alphas)
def test_shortest_not_longer_than_count_central(x, alpha):
    s = sort_sample(x)
    est, win = empirical_shortest(s, alpha)
    cw = central_window(s, alpha)
    assert cw.window_count == win.window_count
    assert est.length <= s[cw.upper_index] - s[cw.lower_index]


@settings(max_examples=200, deadline=None)
@given(draws, alphas, st.floats(0.01, 100), st.floats(-100, 100))
def test_affine_equivariance(x, alpha, a, c):
    s = sort_sample(x)
    t = sort_sample(a * s.values + c)
    tol = 1e-9 * (a * np.abs(x).max() + abs(c) + 1)
    for fn in (lambda q: empirical_shortest(q, alpha)[0], lambda q: empirical_central(q, alpha),
               lambda q: gaussian_fit_interval(q, alpha)):
        e, f = fn(s), fn(t)
        assert f.lower == pytest.approx(a * e.lower + c, abs=tol)
        assert f.upper == pytest.approx(a * e.upper + c, abs=tol)


def test_shortest_rmse_shrinks_with_n():
    from spinterval.distributions import normal

    dist = normal()
    truth = np.array(true_hpd(dist, 0.05).as_tuple())
    rmse = []
    for k, n in enumerate((100, 300, 500, 1000, 2000)):
        err = [
            np.array(empirical_shortest(sample_iid(dist, n, 1000 * k + r), 0.05)[0].as_tuple()) - truth
            for r in range(300)
        ]
        rmse.append(math.sqrt(np.mean(np.square(err))))
    assert all(a > b for a, b in zip(rmse, rmse[1:]))
