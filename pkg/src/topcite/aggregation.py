"""Country and institution totals from per-unit counts.

Two ways to get the expected number of top-x% papers of a group of units:

* AFCL (aggregate first, calculate later) pools ``P`` and ``P_top10`` over
  the units and evaluates the expected-count formula once;
* CFAL (calculate first, add later) evaluates it per unit and sums.

For exponents above 1 the power function is strictly convex, so CFAL is
never below AFCL and is strictly above it as soon as two units differ in
ratio.  Sums use :func:`math.fsum` so results do not depend on unit order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import ValidationError
from .indicators import (
    LevelLike,
    PercentileLevel,
    ResearchUnit,
    UnitAssessment,
    as_level,
    assess_unit,
    expected_top_count,
)


@dataclass(frozen=True)
class AggregateAssessment:
    level: PercentileLevel
    units: list[UnitAssessment]
    afcl: float
    cfal: float
    gap_absolute: float
    gap_factor: float
    pooled_ratio: float
    pooled_p: float
    pooled_p_top10: float
    skipped: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class CumulativeRow:
    rank: int
    unit_id: str
    label: str
    expected_count: float
    running_total: float


@dataclass(frozen=True)
class CumulativeCurve:
    level: PercentileLevel
    rows: list[CumulativeRow]
    afcl: float
    prefix_to_afcl: Optional[int]

    @property
    def cfal(self) -> float:
        return self.rows[-1].running_total if self.rows else 0.0


def _usable(units: Iterable[ResearchUnit]) -> tuple[list[ResearchUnit], list[str]]:
    units = list(units)
    if not units:
        raise ValidationError("at least one research unit is required")
    kept = [u for u in units if u.p_total > 0]
    skipped = [u.id for u in units if u.p_total <= 0]
    if skipped:
        warnings.warn(f"skipping {len(skipped)} unit(s) with no papers: {', '.join(skipped)}")
    return kept, skipped


def _pooled(units: Sequence[ResearchUnit]) -> tuple[float, float]:
    p = math.fsum(u.p_total for u in units)
    if not p > 0:
        raise ValidationError("pooled paper count is zero")
    return p, math.fsum(u.p_top10 for u in units)


def _afcl(units: Sequence[ResearchUnit], level: PercentileLevel) -> float:
    p, t = _pooled(units)
    if level.exponent == 1.0:
        return t
    return expected_top_count(p, t / p, level)


def afcl(units: Iterable[ResearchUnit], level: LevelLike) -> float:
    """Expected top-x% count computed from the pooled totals of ``units``."""
    kept, _ = _usable(units)
    return _afcl(kept, as_level(level))


def cfal(units: Iterable[ResearchUnit], level: LevelLike) -> float:
    """Sum of the per-unit expected top-x% counts."""
    kept, _ = _usable(units)
    level = as_level(level)
    return math.fsum(assess_unit(u, level).expected_count for u in kept)


def _factor(cfal_value: float, afcl_value: float) -> float:
    if afcl_value == 0.0:
        return math.inf if cfal_value > 0 else 1.0
    return cfal_value / afcl_value


def ineq4_gap(units: Iterable[ResearchUnit], level: LevelLike) -> AggregateAssessment:
    """Both aggregation methods side by side, with absolute and relative gap."""
    kept, skipped = _usable(units)
    level = as_level(level)
    assessed = [assess_unit(u, level) for u in kept]
    p, t = _pooled(kept)
    lo = _afcl(kept, level)
    hi = math.fsum(a.expected_count for a in assessed)
    if level.exponent > 1.0 and hi < lo - 1e-9 * max(1.0, lo):
        raise AssertionError(f"convexity violated: cfal={hi!r} < afcl={lo!r}")
    return AggregateAssessment(
        level=level,
        units=assessed,
        afcl=lo,
        cfal=hi,
        gap_absolute=hi - lo,
        gap_factor=_factor(hi, lo),
        pooled_ratio=t / p,
        pooled_p=p,
        pooled_p_top10=t,
        skipped=skipped,
    )


def cumulative_cfal(units: Iterable[ResearchUnit], level: LevelLike) -> CumulativeCurve:
    """Units ranked by expected count (ties by id) with running CFAL totals.

    ``prefix_to_afcl`` is the number of leading units whose running total
    first reaches the AFCL value of the whole list; the comparison allows
    1e-12 relative slack so that an equal-ratio list reaches it at the end.
    """
    kept, _ = _usable(units)
    level = as_level(level)
    by_id = {u.id: u for u in kept}
    assessed = sorted(
        (assess_unit(u, level) for u in kept), key=lambda a: (-a.expected_count, a.unit_id)
    )
    reference = _afcl(kept, level)
    rows = []
    prefix = None
    seen = []
    for rank, a in enumerate(assessed, start=1):
        seen.append(a.expected_count)
        running = math.fsum(seen)
        rows.append(CumulativeRow(rank, a.unit_id, by_id[a.unit_id].label, a.expected_count, running))
        if prefix is None and running >= reference * (1 - 1e-12):
            prefix = rank
    return CumulativeCurve(level, rows, reference, prefix)


def assess_groups(
    units: Iterable[ResearchUnit], group_key: str, level: LevelLike
) -> dict[str, AggregateAssessment]:
    """One assessment per country (``group_key="country"``) or for all units together."""
    units = list(units)
    if group_key == "all":
        groups = {"all": units}
    elif group_key == "country":
        groups: dict[str, list[ResearchUnit]] = {}
        for u in units:
            country = (u.country or "").strip()
            if not country:
                raise ValidationError(f"unit {u.id!r} has no country; cannot group by country")
            groups.setdefault(country, []).append(u)
    else:
        raise ValidationError(f"unknown group key {group_key!r}; expected 'country' or 'all'")
    return {key: ineq4_gap(groups[key], level) for key in sorted(groups)}
