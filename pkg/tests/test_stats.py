import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaosgas.chaos import ChaoticState, MapParams
from chaosgas.market import AgentActivity, MarketConfig, passive_agents, run_simulation
from chaosgas.stats import (
    Ccdf,
    FitError,
    active_set,
    ccdf,
    classify,
    fit_exponential,
    fit_pareto,
    hill_estimator,
    histogram,
    winloss_profile,
)

money_lists = st.lists(st.floats(0, 1e7), min_size=1, max_size=200)


def test_histogram_counts():
    h = histogram([0, 999, 1000], None, 2, (0, 2000))
    assert h.counts.tolist() == [2, 1]
    assert h.bin_edges.tolist() == [0, 1000, 2000]


def test_histogram_saturates_out_of_range():
    h = histogram([-5, 50, 5000], None, 4, (0, 100))
    assert h.counts.tolist() == [1, 0, 1, 1]


def test_histogram_single_agent_and_subset():
    assert histogram([3.0, 7.0, 9.0], {1}, 5, (0, 10)).counts.sum() == 1


def test_histogram_errors():
    with pytest.raises(ValueError):
        histogram([1.0], set(), 2, (0, 1))
    with pytest.raises(ValueError):
        histogram([1.0], None, 0, (0, 1))
    with pytest.raises(ValueError):
        histogram([1.0], None, 2, (1, 1))


@given(money_lists, st.integers(1, 30))
def test_histogram_mass(values, bins):
    assert histogram(values, None, bins, (0, 1e6)).counts.sum() == len(values)


def test_ccdf_three_points():
    c = ccdf([1, 2, 3])
    assert c.money_levels.tolist() == [1, 2, 3]
    np.testing.assert_allclose(c.prob_geq, [1, 2 / 3, 1 / 3], rtol=0, atol=1e-15)


def test_ccdf_ties_and_equal_values():
    c = ccdf([5, 5, 5])
    assert c.money_levels.tolist() == [5] and c.prob_geq.tolist() == [1.0]
    c = ccdf([2, 1, 2, 3])
    assert c.prob_geq.tolist() == [1.0, 0.75, 0.25]


def test_ccdf_uses_include_set():
    c = ccdf([100, 1000, 1000, 7], {0, 3})
    assert c.money_levels.tolist() == [7, 100]
    with pytest.raises(ValueError):
        ccdf([1.0], [])


@given(money_lists)
def test_ccdf_monotone_against_brute_count(values):
    c = ccdf(values)
    assert np.all(np.diff(c.prob_geq) < 0)
    assert c.prob_geq[0] == 1.0
    for level, p in zip(c.money_levels, c.prob_geq):
        assert p == sum(v >= level for v in values) / len(values)


def test_classify_basic():
    b = classify([100, 600, 3000], None, (500, 2000))
    assert b.population_share == pytest.approx({"poor": 1 / 3, "middle": 1 / 3, "rich": 1 / 3})
    assert b.money_share["poor"] == pytest.approx(100 / 3700)
    assert b.money_share["middle"] == pytest.approx(600 / 3700)
    assert b.money_share["rich"] == pytest.approx(3000 / 3700)


def test_classify_boundaries_and_all_poor():
    b = classify([0, 500, 2000], None, (500, 2000))
    assert b.population_share == pytest.approx({"poor": 1 / 3, "middle": 1 / 3, "rich": 1 / 3})
    assert classify([1, 2, 3], None, (500, 2000)).population_share["poor"] == 1.0


def test_classify_errors():
    with pytest.raises(ValueError):
        classify([1.0], None, (2000, 500))
    with pytest.raises(ValueError):
        classify([1.0], None, (0, 500))
    with pytest.raises(ValueError):
        classify([1.0], set(), (500, 2000))


@given(st.lists(st.floats(0.01, 1e6), min_size=1, max_size=100), st.sampled_from([0.5, 2.0, 4.0, 0.125]))
def test_classify_partition_and_scale_equivariance(values, k):
    b = classify(values, None, (500, 2000))
    assert math.isclose(sum(b.population_share.values()), 1.0, abs_tol=1e-9)
    assert math.isclose(sum(b.money_share.values()), 1.0, abs_tol=1e-9)
    # powers of two keep the scaled values and bounds exact
    s = classify([v * k for v in values], None, (500 * k, 2000 * k))
    assert s.population_share == b.population_share
    for name in b.money_share:
        assert s.money_share[name] == pytest.approx(b.money_share[name], rel=1e-12, abs=1e-15)


def analytic_exponential():
    m = np.arange(0, 2001, 100, dtype=float)
    return Ccdf(m, np.exp(-m / 1000))


def analytic_pareto():
    m = 2000 * np.logspace(0, 2, 10)
    return Ccdf(m, (m / 2000) ** -1.5)


def test_fit_exponential_analytic():
    f = fit_exponential(analytic_exponential(), (0, 2000))
    assert f.model == "exponential" and not f.flagged
    assert abs(f.parameter - 1000) <= 1e-9
    assert f.r_squared >= 1 - 1e-12
    assert f.n_points == 21


def test_fit_pareto_analytic():
    f = fit_pareto(analytic_pareto(), 2000)
    assert abs(f.parameter - 1.5) <= 1e-9
    assert f.r_squared >= 1 - 1e-12
    assert f.fit_range[0] == 2000


def test_fit_pareto_segment_upper_bound():
    c = analytic_pareto()
    f = fit_pareto(c, 2000, upper=float(c.money_levels[5]))
    assert f.n_points == 6 and abs(f.parameter - 1.5) <= 1e-9


def test_fits_need_three_points():
    c = Ccdf(np.array([1.0, 2.0]), np.array([1.0, 0.5]))
    with pytest.raises(FitError):
        fit_exponential(c, (0, 10))
    with pytest.raises(FitError):
        fit_pareto(c, 1.0)


def test_increasing_data_is_flagged():
    c = Ccdf(np.array([1.0, 2.0, 3.0, 4.0]), np.array([0.1, 0.2, 0.4, 0.8]))
    assert fit_exponential(c, (0, 10)).flagged
    assert fit_pareto(c, 1.0).flagged


def test_exponential_sample_recovery():
    sample = np.random.default_rng(2024).exponential(1000, 10**4)
    c = ccdf(sample)
    f = fit_exponential(c)
    assert f.r_squared >= 0.98
    assert abs(f.parameter - 1000) <= 0.05 * 1000
    assert c.prob_geq[c.money_levels <= f.fit_range[1]].min() >= 0.01


def test_pareto_sample_recovery():
    rng = np.random.default_rng(2025)
    sample = 2000 * (1 - rng.random(10**4)) ** (-1 / 1.5)
    f = fit_pareto(ccdf(sample), 2000)
    assert abs(f.parameter - 1.5) <= 0.15
    assert abs(hill_estimator(sample, None, 2000) - 1.5) <= 0.15


def test_desk_symmetric_run_is_gibbs():
    n = 500
    res = run_simulation(MarketConfig(n, 1000.0), MapParams(1.032, 1.032), ChaoticState(0.3, 0.6),
                         1000, 2 * n * n, 1)
    active = active_set(n, passive_agents(res.activity).passive)
    f = fit_exponential(ccdf(res.ledger.balances, active))
    mean = res.ledger.balances[active].mean()
    assert abs(f.parameter - mean) <= 0.10 * mean


def test_winloss_two_agents():
    act = AgentActivity.zeros(2)
    act.times_i[:] = [3, 1]
    act.times_j[:] = [1, 3]
    prof = winloss_profile(act, [5, 10])
    assert prof.agent_index.tolist() == [1, 0]
    assert prof.net_wins.tolist() == [2, -2]
    assert prof.losses.tolist() == [1, 3]


def test_winloss_ties_follow_index():
    prof = winloss_profile(AgentActivity.zeros(4), [7, 7, 7, 7])
    assert prof.agent_index.tolist() == [0, 1, 2, 3]
    with pytest.raises(ValueError):
        winloss_profile(AgentActivity.zeros(3), [1.0, 2.0])


@given(st.lists(st.integers(0, 5).map(float), min_size=1, max_size=40))
def test_winloss_ordering(values):
    prof = winloss_profile(AgentActivity.zeros(len(values)), values)
    expected = sorted(range(len(values)), key=lambda k: (-values[k], k))
    assert prof.agent_index.tolist() == expected
