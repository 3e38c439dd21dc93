import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topcite.errors import DegenerateSampleError, DomainError, RankDeficiencyError, ValidationError
from topcite.rng import RandomStream
from topcite.stats import (
    LognormalParams,
    fit_ep_powerlaw,
    fit_lognormal,
    fit_polynomial,
    fit_quadratic,
    kolmogorov_pvalue,
    ks_lognormal_test,
    sample_lognormal,
)


def phi(z):
    return 0.5 * (1 + math.erf(z / math.sqrt(2)))


def kolmogorov_series(lam, terms=200):
    if lam <= 0:
        return 1.0
    return 2 * sum((-1) ** (k - 1) * math.exp(-2 * k * k * lam * lam) for k in range(1, terms))


def brute_ks(values):
    """D by scanning both ECDF step sides, straight from the definition."""
    logs = sorted(math.log(v) for v in values)
    n = len(logs)
    mu = sum(logs) / n
    sd = math.sqrt(sum((x - mu) ** 2 for x in logs) / (n - 1))
    d = 0.0
    for i, x in enumerate(logs):
        f = phi((x - mu) / sd)
        d = max(d, abs((i + 1) / n - f), abs(f - i / n))
    return d


def test_sample_lognormal_moments():
    values = sample_lognormal(LognormalParams(3, 1.1), 100_000, RandomStream(8))
    logs = np.log(values)
    assert logs.mean() == pytest.approx(3, abs=0.02)
    assert logs.std(ddof=1) == pytest.approx(1.1, abs=0.02)
    assert not np.all(values == np.round(values))


def test_sample_lognormal_contract():
    (one,) = sample_lognormal(LognormalParams(0, 1), 1, RandomStream(0))
    assert one > 0
    a = sample_lognormal(LognormalParams(2, 1), 50, RandomStream(4))
    assert np.array_equal(a, sample_lognormal(LognormalParams(2, 1), 50, RandomStream(4)))
    assert not np.array_equal(a, sample_lognormal(LognormalParams(2, 1), 50, RandomStream(5)))
    with pytest.raises(ValidationError):
        sample_lognormal(LognormalParams(0, 1), 0, RandomStream(0))
    with pytest.raises(ValidationError):
        LognormalParams(0, 0)


def test_fit_lognormal_hand_example():
    fit = fit_lognormal([1, math.e**2, math.e**4])
    assert fit.mu == pytest.approx(2, rel=1e-12)
    assert fit.sigma == pytest.approx(2, rel=1e-12)


@pytest.mark.parametrize("values, exc", [
    ([math.e**3, math.e**3], DegenerateSampleError),
    ([5.0], DegenerateSampleError),
    ([1.0, 0.0, 2.0], DomainError),
    ([1.0, -2.0], DomainError),
])
def test_fit_lognormal_errors(values, exc):
    with pytest.raises(exc):
        fit_lognormal(values)


def test_fit_lognormal_round_trip():
    fit = fit_lognormal(sample_lognormal(LognormalParams(4, 1.1), 80_000, RandomStream(21)))
    assert fit.mu == pytest.approx(4, abs=0.02)
    assert fit.sigma == pytest.approx(1.1, abs=0.02)


positive_samples = st.lists(st.floats(min_value=1e-3, max_value=1e6), min_size=3, max_size=60).filter(
    lambda v: max(v) / min(v) > 1.001)


@settings(max_examples=100)
@given(positive_samples, st.floats(min_value=1e-3, max_value=1e3))
def test_fit_is_scale_equivariant(values, c):
    base = fit_lognormal(values)
    scaled = fit_lognormal([c * v for v in values])
    assert scaled.mu == pytest.approx(base.mu + math.log(c), abs=1e-9)
    assert scaled.sigma == pytest.approx(base.sigma, rel=1e-9)


@settings(max_examples=100)
@given(positive_samples, st.floats(min_value=1e-3, max_value=1e3))
def test_ks_distance_is_scale_invariant(values, c):
    a = ks_lognormal_test(values).d
    b = ks_lognormal_test([c * v for v in values]).d
    assert b == pytest.approx(a, abs=1e-9)


def test_ks_hand_example():
    # standardized logs are -1, 0, 1; D = 1/3 - Phi(-1) on both sides
    oracle = 1 / 3 - phi(-1)
    assert oracle == pytest.approx(0.17467, abs=1e-5)
    result = ks_lognormal_test([1, math.e, math.e**2])
    assert result.fitted.mu == pytest.approx(1) and result.fitted.sigma == pytest.approx(1)
    assert result.d == pytest.approx(0.17467, abs=1e-4)
    assert result.d == pytest.approx(oracle, rel=1e-12)
    assert result.n == 3


def test_ks_matches_brute_force():
    values = sample_lognormal(LognormalParams(1, 0.7), 301, RandomStream(2))
    assert ks_lognormal_test(values).d == pytest.approx(brute_ks(values), rel=1e-12)


def test_ks_pvalue_against_series():
    for d, n in [(0.01, 80_000), (0.004, 80_000), (0.05, 300), (0.2, 20)]:
        root = math.sqrt(n)
        lam = (root + 0.12 + 0.11 / root) * d
        assert kolmogorov_pvalue(d, n) == pytest.approx(kolmogorov_series(lam), abs=1e-12)


def test_ks_pvalue_monotone_in_d():
    ps = [kolmogorov_pvalue(d, 500) for d in np.linspace(0, 0.3, 61)]
    assert all(b <= a for a, b in zip(ps, ps[1:]))
    assert ps[0] == 1.0


def test_ks_accepts_lognormal_and_rejects_uniform():
    good = sample_lognormal(LognormalParams(3, 1.1), 80_000, RandomStream(5))
    assert ks_lognormal_test(good).p_value > 0.15
    bad = np.linspace(1, 2, 5000)
    assert ks_lognormal_test(bad).p_value < 0.01


def test_ks_needs_three_values():
    with pytest.raises(DegenerateSampleError):
        ks_lognormal_test([1.0, 2.0])


def test_quadratic_exact():
    fit = fit_quadratic([0, 1, 2, 3], [1, 3, 9, 19])
    assert fit.coefficients == pytest.approx((2, 0, 1), abs=1e-9)
    assert fit.rss == pytest.approx(0, abs=1e-18)
    flat = fit_quadratic([2, 5, 7, 11, 13], [5] * 5)
    assert flat.coefficients == pytest.approx((0, 0, 5), abs=1e-9)


def test_quadratic_matches_lstsq():
    rng = np.random.default_rng(0)
    x = np.arange(1, 401, dtype=float)
    y = 0.3 - 0.0014 * x + 1.8e-6 * x**2 + rng.normal(0, 0.02, x.size)
    fit = fit_quadratic(x, y)
    ref, res, *_ = np.linalg.lstsq(np.vander(x, 3), y, rcond=None)
    np.testing.assert_allclose(fit.coefficients, ref, rtol=1e-6)
    assert fit.rss == pytest.approx(res[0], rel=1e-9)


def test_quadratic_rank_deficiency():
    with pytest.raises(RankDeficiencyError):
        fit_quadratic([1, 1, 1, 1], [1, 2, 3, 4])
    with pytest.raises(RankDeficiencyError):
        fit_quadratic([1, 2], [1, 2])
    with pytest.raises(RankDeficiencyError):
        fit_quadratic([1, 2, 1, 2], [0, 1, 0, 1])


def test_linear_fit_rss_is_never_smaller():
    x = np.arange(1, 50)
    y = np.sqrt(x)
    assert fit_polynomial(x, y, 2).rss < fit_polynomial(x, y, 1).rss


def test_powerlaw_round_trip_examples():
    fit = fit_ep_powerlaw([(10, 200), (1, 40), (0.1, 8)], 1000)
    assert fit.ep == pytest.approx(0.2, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.intercept == pytest.approx(fit.expected_intercept, abs=1e-9)
    assert fit_ep_powerlaw([(10, 100), (1, 10)], 1000).ep == pytest.approx(0.1, abs=1e-12)
    two = fit_ep_powerlaw([(10, 200), (1, 40)], 1000)
    assert two.slope == pytest.approx(-math.log10(0.2), abs=1e-12)
    assert two.slope == pytest.approx(0.69897, abs=1e-5)


@given(st.floats(min_value=0.01, max_value=1.0), st.floats(min_value=10, max_value=1e6))
def test_powerlaw_recovers_any_ratio(r, p):
    counts = [(x, p * r ** (2 - math.log10(x))) for x in (50, 10, 1, 0.1, 0.01)]
    assert fit_ep_powerlaw(counts, p).ep == pytest.approx(r, abs=1e-9)


def test_powerlaw_drops_empty_levels():
    with pytest.warns(UserWarning, match="dropping level 0.01"):
        fit = fit_ep_powerlaw([(10, 200), (1, 40), (0.01, 0)], 1000)
    assert fit.levels_used == 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(ValidationError):
            fit_ep_powerlaw([(10, 200), (1, 0)], 1000)
    with pytest.raises(ValidationError):
        fit_ep_powerlaw([(10, 200), (10, 210)], 1000)
