import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from crossfield.analysis import (
    DegenerateMADError,
    GpdFit,
    InsufficientDataError,
    ccdf_series,
    descriptive_stats,
    fit_gpd,
    gpd_cdf,
    gpd_loglik,
    gpd_start_grid,
    hinges,
    incidence_range,
    ks_critical_value,
    ks_statistic,
    ks_test,
    mad_outliers,
    outlier_incidence,
)
from crossfield.model import ScoreSet


def brute_median(xs):
    s = sorted(xs)
    n = len(s)
    return s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2


def brute_ks(xs, cdf):
    """Scan |ECDF - F| at every sample point and just left of it, by counting."""
    n = len(xs)
    worst = 0.0
    for v in set(xs):
        f = float(cdf(np.array([v]))[0])
        at = sum(1 for x in xs if x <= v) / n
        before = sum(1 for x in xs if x < v) / n
        worst = max(worst, abs(at - f), abs(before - f))
    return worst


def test_descriptive_examples():
    d = descriptive_stats([0, 0, 1, 3])
    assert (d.pct_zero, d.mean, d.median) == (50.0, 1.0, 0.5)
    assert descriptive_stats([1, 2, 3, 4]).iqr == 2.0
    flat = descriptive_stats([2, 2, 2])
    assert flat.coeff_variation == 0 and flat.skewness == 0 and flat.degenerate


def test_descriptive_moments():
    x = [0.0, 0.1, 0.1, 0.4, 2.0, 0.3]
    d = descriptive_stats(x, "F")
    sd = math.sqrt(sum((v - np.mean(x)) ** 2 for v in x) / 5)
    assert d.coeff_variation == pytest.approx(100 * sd / np.mean(x))
    assert d.skewness == pytest.approx(stats.skew(x, bias=False))
    assert d.field_id == "F"


def test_descriptive_needs_two_values():
    with pytest.raises(InsufficientDataError):
        descriptive_stats([1.0])


def test_hinges_odd_and_even():
    assert hinges([1, 2, 3, 4]) == (1.5, 3.5)
    assert hinges([1, 2, 3, 4, 5]) == (2, 4)


def test_descriptive_matches_sort_oracle():
    rng = np.random.default_rng(5)
    for _ in range(40):
        x = rng.exponential(size=rng.integers(2, 1000)).tolist()
        d = descriptive_stats(x)
        assert d.mean == pytest.approx(sum(x) / len(x), rel=1e-12)
        assert d.median == brute_median(x)


def test_loglik_matches_scipy():
    x = stats.genpareto.rvs(0.3, loc=0.01, scale=0.2, size=300, random_state=1)
    for k, s, m in [(0.3, 0.2, 0.0), (0.0, 0.5, 0.0), (-0.2, 2.0, 0.005), (0.9, 0.05, 0.0)]:
        expected = stats.genpareto.logpdf(x, k, loc=m, scale=s).sum()
        assert gpd_loglik(x, k, s, m) == pytest.approx(expected, rel=1e-9)
        assert gpd_cdf(x, k, s, m) == pytest.approx(stats.genpareto.cdf(x, k, loc=m, scale=s), abs=1e-12)
    assert gpd_loglik(x, 0.3, 0.2, 1.0) == -math.inf  # location above the sample minimum
    assert gpd_loglik(x, -0.5, 0.01, 0.0) == -math.inf  # upper endpoint below the maximum


def test_fit_recovers_chemistry_parameters():
    x = stats.genpareto.rvs(0.36, loc=0.003, scale=0.199, size=742, random_state=2013)
    fit = fit_gpd(x)
    assert abs(fit.k - 0.36) <= 0.1
    assert abs(fit.sigma / 0.199 - 1) <= 0.2
    # support invariant and local optimality against every start
    assert x.min() >= fit.mu
    assert all(fit.log_likelihood >= gpd_loglik(x, *start) for start in gpd_start_grid(x))
    ref = stats.genpareto.fit(x)
    assert fit.log_likelihood >= stats.genpareto.logpdf(x, *ref).sum() - 1e-6


def test_fit_exponential_limit():
    x = stats.expon.rvs(scale=0.7, size=5000, random_state=4)
    fit = fit_gpd(x)
    assert abs(fit.k) <= 0.05
    assert fit.sigma == pytest.approx(0.7, rel=0.05)


def test_fit_bounded_data_has_negative_shape():
    x = stats.genpareto.rvs(-0.3, scale=1.0, size=1500, random_state=8)
    fit = fit_gpd(x)
    assert fit.k < 0
    assert x.max() <= fit.mu - fit.sigma / fit.k + 1e-12


def test_fit_needs_thirty_points():
    with pytest.raises(InsufficientDataError):
        fit_gpd(np.arange(1, 20, dtype=float))


def test_fit_zero_inflated_sample_stays_finite():
    rng = np.random.default_rng(0)
    x = np.concatenate([np.zeros(80), stats.genpareto.rvs(0.4, scale=0.1, size=120, random_state=rng)])
    fit = fit_gpd(x)
    assert math.isfinite(fit.log_likelihood) and fit.sigma > 1e-3 and fit.k <= 1.0


@pytest.mark.parametrize("n, printed", [(742, 0.050), (1224, 0.039), (206, 0.095)])
def test_critical_values(n, printed):
    assert round(ks_critical_value(n), 3) == printed


def test_ks_statistic_matches_brute_force():
    rng = np.random.default_rng(9)
    for trial in range(20):
        x = np.round(stats.genpareto.rvs(0.3, scale=0.2, size=rng.integers(5, 120), random_state=rng), 2)
        fit = GpdFit(0.3 + 0.05 * rng.standard_normal(), 0.2, 0.0, 0.0)
        cdf = lambda v: gpd_cdf(v, fit.k, fit.sigma, fit.mu)
        assert ks_test(x, fit).statistic == pytest.approx(brute_ks(x.tolist(), cdf), abs=1e-12)


def test_ks_against_own_step_function_is_tiny():
    x = np.arange(1, 51, dtype=float)
    ecdf = lambda v: np.searchsorted(x, v, side="right") / x.size
    assert ks_statistic(x, ecdf) <= 1 / x.size + 1e-12
    res = ks_test(x, GpdFit(0.0, 10.0, 0.0, 0.0))
    assert res.reject == (res.statistic > res.critical_value_5pct)


def test_ccdf_examples():
    assert ccdf_series([0, 1]) == [(0.05, 1.0), (1.05, 0.5)]
    assert ccdf_series([3.0, 3.0, 3.0]) == [(3.05, 1.0)]
    assert ccdf_series([0.4, 2.0, 0.7], offset=0) == [(0.4, 1.0), (0.7, 2 / 3), (2.0, 1 / 3)]


@given(st.lists(st.integers(0, 20), min_size=1, max_size=60))
def test_ccdf_shape(xs):
    pts = ccdf_series(xs)
    ys = [y for _, y in pts]
    assert ys[0] == 1.0 and all(a >= b for a, b in zip(ys, ys[1:]))
    assert ys[-1] == pytest.approx(xs.count(max(xs)) / len(xs))
    assert [x for x, _ in pts] == sorted({v + 0.05 for v in xs})


def test_mad_examples():
    r = mad_outliers([1, 2, 3, 4, 100])
    assert (r.median, r.mad) == (3, 1)
    assert r.flags.tolist() == [False, False, False, False, True]
    r = mad_outliers([1, 2, 3, 4, 5])
    assert r.mad == 1 and r.ratios.max() == 2 and r.n_outliers == 0
    with pytest.raises(DegenerateMADError):
        mad_outliers([7, 7, 7, 9])
    with pytest.raises(ValueError):
        mad_outliers([0.0, 1.0, 2.0])


@settings(max_examples=60)
@given(st.lists(st.integers(1, 10_000), min_size=5, max_size=80), st.integers(1, 50), st.integers(0, 100))
def test_mad_affine_invariance(xs, a, b):
    try:
        base = mad_outliers(xs).flags
    except DegenerateMADError:
        return
    moved = mad_outliers([a * x + b for x in xs]).flags
    assert base.tolist() == moved.tolist()


def test_outlier_incidence_per_field():
    sets = [ScoreSet.from_pairs("A", [("a1", 1), ("a2", 2), ("a3", 0), ("a4", 100)]),
            ScoreSet.from_pairs("B", [("b1", 3), ("b2", 4)])]
    r = outlier_incidence(sets)
    assert r.counts == {"A": (1, 3), "B": (0, 2)}
    assert r.incidence["A"] == pytest.approx(100 / 3)
    assert incidence_range(r) == pytest.approx(100 / 3)
