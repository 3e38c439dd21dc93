"""Percentile impact indicators and the per-unit versus pooled aggregation gap."""

__version__ = "0.1.0"

from .aggregation import afcl, assess_groups, cfal, cumulative_cfal, ineq4_gap  # noqa: E402
from .indicators import (  # noqa: E402
    PercentileLevel,
    ResearchUnit,
    expected_top_count,
    impact_ratio,
    level_exponent,
    percentile_curve,
    top_probability,
)
