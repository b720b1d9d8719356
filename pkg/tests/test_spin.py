import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinterval import spin as spin_mod
from spinterval.bench import ExperimentCell, run_cell
from spinterval.distributions import exponential, gamma, normal, sample_iid, student_t, true_hpd
from spinterval.empirical_intervals import empirical_shortest
from spinterval.moments import GaussianKDE
from spinterval.qp import QpError, default_bandwidth
from spinterval.rng import RngStream
from spinterval.samples import Method, SortedSample, sort_sample
from spinterval.spin import (
    SpinConfig,
    SpinError,
    augment_bounds,
    central_qp_interval,
    endpoint_weights,
    spin_interval,
)


@pytest.fixture(scope="module")
def normal_500():
    return sample_iid(normal(), 500, 42)


def test_single_unresampled_replicate_equals_direct_qp(normal_500):
    s = normal_500
    res = spin_interval(s, SpinConfig(bootstrap_B=1, resample=False))
    _, win = empirical_shortest(s, 0.05)
    kde = GaussianKDE(s.draws)
    b = default_bandwidth(s.n)
    ends = []
    for idx in (win.lower_index, win.upper_index):
        prob, sol, _ = endpoint_weights(s, idx, s[idx], b, kde)
        ends.append(sol.weights @ s.values[prob.start - 1 : prob.stop])
    assert res.interval.lower == pytest.approx(ends[0], abs=1e-13)
    assert res.interval.upper == pytest.approx(ends[1], abs=1e-13)


def test_deterministic_for_fixed_seed(normal_500):
    a = spin_interval(normal_500, SpinConfig(seed=5))
    b = spin_interval(normal_500, SpinConfig(seed=5))
    assert a.interval.as_tuple() == b.interval.as_tuple()
    np.testing.assert_array_equal(a.lower_kernel, b.lower_kernel)
    c = spin_interval(normal_500, SpinConfig(seed=6))
    assert c.interval.as_tuple() != a.interval.as_tuple()


def test_rng_argument_overrides_seed(normal_500):
    a = spin_interval(normal_500, SpinConfig(seed=5))
    b = spin_interval(normal_500, SpinConfig(seed=99), rng=RngStream(5))
    assert a.interval.as_tuple() == b.interval.as_tuple()


def test_kernels_are_normalised_and_diagnostics_present(normal_500):
    res = spin_interval(normal_500)
    for k in (res.lower_kernel, res.upper_kernel):
        assert k.sum() == pytest.approx(1.0, abs=1e-12)
        assert k.min() >= -1e-12
    d = res.diagnostics
    for key in ("clamped_density_count", "clipped_windows", "objective", "bootstrap_used",
                "failed_replicates", "max_kkt_residual", "bandwidth_b"):
        assert key in d
    assert d["bootstrap_used"] == 50 and d["bandwidth_b"] == 22
    assert d["max_kkt_residual"] < 1e-7


def test_close_to_true_hpd(normal_500):
    res = spin_interval(normal_500)
    assert res.interval.lower == pytest.approx(-1.96, abs=0.25)
    assert res.interval.upper == pytest.approx(1.96, abs=0.25)


@pytest.mark.parametrize("a,c", [(3.0, 0.0), (1e-3, 0.0), (1.0, 100.0), (250.0, -7.0)])
def test_affine_equivariance(a, c):
    x = sample_iid(gamma(3), 200, 1).values
    r1 = spin_interval(SortedSample(x), SpinConfig(bootstrap_B=10))
    r2 = spin_interval(SortedSample(a * x + c), SpinConfig(bootstrap_B=10))
    scale = a * np.abs(x).max() + abs(c)
    assert r2.interval.lower == pytest.approx(a * r1.interval.lower + c, abs=1e-9 * scale)
    assert r2.interval.upper == pytest.approx(a * r1.interval.upper + c, abs=1e-9 * scale)


@settings(max_examples=25, deadline=None)
@given(st.integers(10, 120), st.sampled_from([0.05, 0.1, 0.5]), st.integers(0, 2**31))
def test_endpoints_inside_sample_range(n, alpha, seed):
    rng = np.random.default_rng(seed)
    s = sort_sample(np.round(rng.standard_t(2, n), int(rng.integers(0, 4))))
    res = spin_interval(s, SpinConfig(alpha=alpha, bootstrap_B=5, seed=seed % 1000))
    assert s.values[0] <= res.interval.lower <= res.interval.upper <= s.values[-1]


def test_augment_lower_bound():
    s = sample_iid(exponential(), 50, 3)
    a = augment_bounds(s, lower=0.0)
    assert a.n == 51 and a.values[0] == 0.0
    np.testing.assert_array_equal(a.draws, s.values)


def test_augment_both_bounds():
    u = sort_sample(np.random.default_rng(0).random(30))
    a = augment_bounds(u, 0.0, 1.0)
    assert a.n == 32 and a.values[0] == 0.0 and a.values[-1] == 1.0


def test_augment_identity_and_errors():
    s = sort_sample(np.arange(1.0, 20.0))
    assert augment_bounds(s) is s
    with pytest.raises(ValueError):
        augment_bounds(s, lower=5.0)
    with pytest.raises(ValueError):
        augment_bounds(s, upper=10.0)
    with pytest.raises(ValueError):
        augment_bounds(augment_bounds(s, lower=0.0), upper=30.0)


def test_boundary_pulls_lower_endpoint_to_zero():
    lows = []
    for r in range(30):
        s = sample_iid(exponential(), 500, 100 + r)
        res = spin_interval(s, SpinConfig(lower_bound=0.0, bootstrap_B=20))
        lows.append(res.interval.lower)
        assert res.diagnostics["augmented"] == [0.0]
    assert np.mean(np.array(lows) <= 0.05) > 0.8


def test_constant_sample_degenerate():
    res = spin_interval(sort_sample([2.5] * 20))
    assert res.interval.as_tuple() == (2.5, 2.5)
    assert "constant-sample" in res.interval.notes


def test_too_few_draws():
    with pytest.raises(ValueError, match="at least 10"):
        spin_interval(sort_sample(np.arange(9.0)))


def test_config_validation():
    with pytest.raises(ValueError):
        SpinConfig(alpha=1.5)
    with pytest.raises(ValueError):
        SpinConfig(bootstrap_B=0)
    with pytest.raises(ValueError):
        SpinConfig(bandwidth_b=1)
    with pytest.raises(ValueError):
        SpinConfig(compat={"bogus"})
    with pytest.raises(ValueError):
        SpinConfig(lower_bound=1.0, upper_bound=0.0)


@pytest.mark.parametrize("flags", [{"paper-matrix"}, {"paper-qpp"}, {"paper-matrix", "paper-qpp"}])
def test_compat_flags_change_weights(flags):
    s = sample_iid(gamma(3), 300, 2)
    base = spin_interval(s, SpinConfig(bootstrap_B=5))
    alt = spin_interval(s, SpinConfig(bootstrap_B=5, compat=flags))
    assert alt.interval.as_tuple() != base.interval.as_tuple()
    assert abs(alt.interval.lower - base.interval.lower) < 0.5


def test_explicit_bandwidth(normal_500):
    res = spin_interval(normal_500, SpinConfig(bandwidth_b=8, bootstrap_B=3))
    assert res.diagnostics["bandwidth_b"] == 8
    assert np.count_nonzero(res.lower_kernel) <= 3 * 9


def test_crossed_endpoints_collapse(normal_500):
    def swapped(sample, alpha):
        lo, hi = spin_mod._shortest_centers(sample, alpha)
        return hi, lo

    res = spin_mod._run(normal_500, SpinConfig(bootstrap_B=3), None, swapped, Method.SPIN)
    assert res.interval.lower == res.interval.upper
    assert "crossed-endpoints" in res.interval.notes


def test_too_many_failed_replicates(monkeypatch, normal_500):
    calls = {"n": 0}
    real = spin_mod.endpoint_weights

    def flaky(*args, **kw):
        calls["n"] += 1
        if calls["n"] % 4 != 0:
            raise QpError("synthetic failure")
        return real(*args, **kw)

    monkeypatch.setattr(spin_mod, "endpoint_weights", flaky)
    with pytest.raises(SpinError, match="failed"):
        spin_interval(normal_500, SpinConfig(bootstrap_B=10))


def test_some_failed_replicates_are_tolerated(monkeypatch, normal_500):
    calls = {"n": 0}
    real = spin_mod.endpoint_weights

    def flaky(*args, **kw):
        calls["n"] += 1
        if calls["n"] == 1:
            raise QpError("synthetic failure")
        return real(*args, **kw)

    monkeypatch.setattr(spin_mod, "endpoint_weights", flaky)
    res = spin_interval(normal_500, SpinConfig(bootstrap_B=10))
    assert res.diagnostics["failed_replicates"] == 1
    assert res.diagnostics["bootstrap_used"] == 9


def test_central_qp_targets_central_quantiles():
    s = sample_iid(gamma(3), 1000, 4)
    res = central_qp_interval(s)
    assert res.interval.method is Method.CENTRAL_QP
    fr = gamma(3).frozen
    assert res.interval.lower == pytest.approx(fr.ppf(0.025), abs=0.15)
    assert res.interval.upper == pytest.approx(fr.ppf(0.975), abs=0.5)


# Statistical properties over many replications.


@pytest.mark.slow
def test_central_qp_agrees_with_spin_for_symmetric_target():
    rep = run_cell(ExperimentCell(normal(), 500, replications=200,
                                  methods=(Method.SPIN, Method.CENTRAL_QP), seed=31))
    e = rep.estimates
    for j, which in enumerate(("lower", "upper")):
        diff = e[:, 0, j] - e[:, 1, j]
        combined = math.hypot(rep[Method.SPIN].endpoint(which).rmse,
                              rep[Method.CENTRAL_QP].endpoint(which).rmse)
        # on a given sample the two estimates differ by less than their
        # combined simulation error
        assert math.sqrt(np.mean(diff**2)) < combined


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="mean +/- 1.96 sd is nearly unbiased for t(5) at 95% and has "
                   "lower RMSE than central-QP (0.227 vs 0.326 summed, 200 reps)")
def test_central_qp_beats_gaussian_fit_on_t5():
    rep = run_cell(ExperimentCell(student_t(5), 500, replications=200,
                                  methods=(Method.CENTRAL_QP, Method.GAUSSIAN_FIT), seed=32))
    assert rep[Method.CENTRAL_QP].rmse_total < rep[Method.GAUSSIAN_FIT].rmse_total


@pytest.mark.slow
def test_interval_nesting_in_alpha():
    lengths = {0.05: [], 0.5: []}
    for r in range(1000):
        s = sample_iid(normal(), 100, RngStream(33).substream(r))
        for alpha in lengths:
            res = spin_interval(s, SpinConfig(alpha=alpha, bootstrap_B=10, seed=r))
            lengths[alpha].append(res.interval.length)
    assert np.mean(lengths[0.05]) > np.mean(lengths[0.5])


@pytest.mark.slow
def test_rmse_decreases_with_n():
    rmse = []
    for n in (100, 300, 500, 1000, 2000):
        rep = run_cell(ExperimentCell(normal(), n, replications=200, methods=(Method.SPIN,), seed=34))
        rmse.append(rep[Method.SPIN].rmse_total)
    pooled = [(a + b) / 2 for a, b in zip(rmse, rmse[1:])]
    assert all(a >= b for a, b in zip(pooled, pooled[1:]))
    assert rmse[0] > rmse[-1]
