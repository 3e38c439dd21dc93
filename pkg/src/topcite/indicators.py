"""Percentile impact indicators for a single research unit.

A unit publishing ``P`` papers with ``T`` of them in the world top 10% has
impact ratio ``r = T / P``.  Under lognormal citation distributions the
probability that one of its papers lands in the top ``x`` percent is
``r ** (2 - log10(x))`` and the expected count there is ``P`` times that.
Levels are in percent throughout: ``x=10`` is the top 10%.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .errors import DegenerateUnitError, ValidationError


@dataclass(frozen=True)
class PercentileLevel:
    x: float

    def __post_init__(self):
        x = float(self.x)
        if not (0.0 < x <= 100.0) or math.isnan(x):
            raise ValidationError(f"percentile level must lie in (0, 100], got {self.x!r}")
        object.__setattr__(self, "x", x)

    @property
    def exponent(self) -> float:
        return 2.0 - math.log10(self.x)

    def __str__(self) -> str:
        return f"top {self.x:g}%"


LevelLike = Union[PercentileLevel, float, int]


def as_level(level: LevelLike) -> PercentileLevel:
    return level if isinstance(level, PercentileLevel) else PercentileLevel(level)


@dataclass(frozen=True)
class ResearchUnit:
    """One homogeneous publishing unit.  Counts may be fractional."""

    id: str
    p_total: float
    p_top10: float
    label: str = ""
    country: Optional[str] = None

    def __post_init__(self):
        for name in ("p_total", "p_top10"):
            value = float(getattr(self, name))
            if math.isnan(value) or value < 0:
                raise ValidationError(f"unit {self.id!r}: {name} must be >= 0, got {value}")
            object.__setattr__(self, name, value)
        if self.p_top10 > self.p_total:
            raise ValidationError(
                f"unit {self.id!r}: p_top10 ({self.p_top10:g}) exceeds p_total ({self.p_total:g})"
            )
        if not self.label:
            object.__setattr__(self, "label", self.id)

    @property
    def ratio(self) -> float:
        return impact_ratio(self.p_total, self.p_top10)


@dataclass(frozen=True)
class UnitAssessment:
    unit_id: str
    ratio: float
    level: PercentileLevel
    probability: float
    expected_count: float


def impact_ratio(p_total: float, p_top10: float) -> float:
    """Share of a unit's papers in the world top 10%."""
    if not p_total > 0:
        raise DegenerateUnitError(f"impact ratio undefined for p_total={p_total}")
    if p_top10 < 0 or p_top10 > p_total:
        raise ValidationError(f"p_top10={p_top10} must lie in [0, p_total={p_total}]")
    return p_top10 / p_total


def level_exponent(level: LevelLike) -> float:
    return as_level(level).exponent


def _power(base: float, exponent: float) -> float:
    # small integral exponents by repeated multiplication: r**2 is then exactly r*r
    if exponent == 0.0:
        return 1.0
    if exponent.is_integer() and 0 < exponent <= 8:
        out = base
        for _ in range(int(exponent) - 1):
            out *= base
        return out
    return base**exponent


def top_probability(ratio: float, level: LevelLike) -> float:
    """Probability that one paper of a unit with this ratio is in the top x%.

    ``0 ** 0`` is taken as 1: at ``x=100`` every paper qualifies.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ValidationError(f"impact ratio must lie in [0, 1], got {ratio}")
    return _power(float(ratio), as_level(level).exponent)


def expected_top_count(p_total: float, ratio: float, level: LevelLike) -> float:
    if p_total < 0:
        raise ValidationError(f"p_total must be >= 0, got {p_total}")
    return p_total * top_probability(ratio, level)


def assess_unit(unit: ResearchUnit, level: LevelLike) -> UnitAssessment:
    level = as_level(level)
    ratio = unit.ratio
    probability = top_probability(ratio, level)
    # at exponent 1 the expected count is the observed top-10% count itself
    expected = unit.p_top10 if level.exponent == 1.0 else unit.p_total * probability
    return UnitAssessment(unit.id, ratio, level, probability, expected)


def percentile_curve(unit: ResearchUnit, levels: Iterable[LevelLike]) -> list[tuple[float, float]]:
    """Expected paper counts of ``unit`` at each level, as ``(x, count)`` pairs."""
    levels = [as_level(lv) for lv in levels]
    if not levels:
        raise ValidationError("percentile_curve needs at least one level")
    ratio = unit.ratio
    return [(lv.x, expected_top_count(unit.p_total, ratio, lv)) for lv in levels]
