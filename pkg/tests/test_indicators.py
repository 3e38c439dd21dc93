import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from topcite.errors import DegenerateUnitError, ValidationError
from topcite.indicators import (
    PercentileLevel,
    ResearchUnit,
    assess_unit,
    expected_top_count,
    impact_ratio,
    level_exponent,
    percentile_curve,
    top_probability,
)

ratios = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
open_ratios = st.floats(min_value=1e-6, max_value=1 - 1e-6)
levels = st.floats(min_value=1e-4, max_value=100.0)


def test_impact_ratio_examples():
    assert impact_ratio(4803, 1149) == pytest.approx(0.2392, abs=5e-5)
    assert round(impact_ratio(4803, 1149), 2) == 0.24
    assert impact_ratio(1000, 0) == 0.0
    assert round(impact_ratio(51927, 3584), 3) == 0.069


@pytest.mark.parametrize("p, t, exc", [(0, 0, DegenerateUnitError), (-5, 0, DegenerateUnitError),
                                       (10, 11, ValidationError)])
def test_impact_ratio_errors(p, t, exc):
    with pytest.raises(exc):
        impact_ratio(p, t)


@pytest.mark.parametrize("x, expected", [(100, 0.0), (10, 1.0), (1, 2.0), (0.01, 4.0)])
def test_level_exponent(x, expected):
    assert level_exponent(x) == expected


@pytest.mark.parametrize("x", [0, -1, 100.5, float("nan")])
def test_level_bounds(x):
    with pytest.raises(ValidationError):
        PercentileLevel(x)


def test_top_probability_examples():
    assert top_probability(0.2, 0.01) == pytest.approx(0.0016, rel=1e-12)
    assert top_probability(0.1, 0.01) == pytest.approx(0.0001, rel=1e-12)
    assert top_probability(0.37, 100) == 1.0
    assert top_probability(0.0, 100) == 1.0


def test_expected_top_count_examples():
    assert expected_top_count(500, 0.2, 0.01) == pytest.approx(0.8, rel=1e-12)
    assert expected_top_count(1000, 0.1, 0.01) == pytest.approx(0.1, rel=1e-12)
    assert expected_top_count(4803, 1149 / 4803, 0.01) == pytest.approx(15.73, rel=5e-3)


def test_percentile_curve_examples():
    world_average = ResearchUnit("w", 1000, 100)
    got = percentile_curve(world_average, [100, 10, 1, 0.1, 0.01])
    assert [x for x, _ in got] == [100, 10, 1, 0.1, 0.01]
    assert [n for _, n in got] == pytest.approx([1000, 100, 10, 1, 0.1], rel=1e-12)
    # direct evaluation P * r**(2 - lg x) with exact rationals
    strong = percentile_curve(ResearchUnit("s", 1000, 200), [10, 1, 0.01])
    assert [n for _, n in strong] == pytest.approx(
        [float(1000 * Fraction(1, 5) ** e) for e in (1, 2, 4)], rel=1e-12)
    assert [n for _, n in strong] == pytest.approx([200, 40, 1.6], rel=1e-12)
    weak = percentile_curve(ResearchUnit("w", 1000, 50), [10, 1])
    assert [n for _, n in weak] == pytest.approx([50, 2.5], rel=1e-12)


def test_percentile_curve_needs_levels():
    with pytest.raises(ValidationError):
        percentile_curve(ResearchUnit("a", 10, 1), [])
    with pytest.raises(DegenerateUnitError):
        percentile_curve(ResearchUnit("a", 0, 0), [10])


def test_unit_validation():
    with pytest.raises(ValidationError):
        ResearchUnit("a", 1, 2)
    with pytest.raises(ValidationError):
        ResearchUnit("a", -1, 0)
    assert ResearchUnit("a", 12.5, 3.25).ratio == 0.26


def test_assess_unit_fields():
    a = assess_unit(ResearchUnit("u", 500, 100), 0.01)
    assert a.probability == pytest.approx(0.0016, rel=1e-12)
    assert a.expected_count == pytest.approx(500 * a.probability, rel=1e-15)
    assert assess_unit(ResearchUnit("u", 3089, 802), 10).expected_count == 802


@given(open_ratios, levels, levels)
def test_narrower_level_is_less_likely(r, x1, x2):
    hi, lo = max(x1, x2), min(x1, x2)
    assert top_probability(r, hi) >= top_probability(r, lo)


@given(ratios)
def test_level_ten_is_identity_and_level_one_squares(r):
    assert top_probability(r, 10) == r
    assert top_probability(r, 1) == r * r


@given(st.floats(min_value=0, max_value=1e6), ratios, levels, st.floats(min_value=0.1, max_value=100))
def test_expected_count_is_homogeneous_in_size(p, r, x, c):
    assert expected_top_count(c * p, r, x) == pytest.approx(c * expected_top_count(p, r, x),
                                                            rel=1e-12, abs=1e-300)


@given(st.floats(min_value=1e-3, max_value=1e9), ratios)
def test_ratio_round_trip(p, r):
    assert impact_ratio(p, r * p) == pytest.approx(r, rel=4 * 2**-52, abs=1e-300)


@given(st.floats(min_value=1, max_value=1e5), open_ratios)
def test_curve_nonincreasing_as_level_narrows(p, r):
    counts = [n for _, n in percentile_curve(ResearchUnit("u", p, r * p), [100, 50, 10, 1, 0.1, 0.01])]
    assert all(b <= a for a, b in zip(counts, counts[1:]))
    assert counts[0] == p
    assert not math.isnan(counts[-1])
