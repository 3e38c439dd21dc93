"""Synthetic citation world and the 20-unit aggregation experiment.

The world is ``n_series`` primary series of ``per_series`` continuous
lognormal values whose location falls linearly from ``mu_max`` to
``mu_min``.  Every series is characterised by its share of values at or
above the world top-10% threshold.  Synthetic institutions are assembled
by picking 20 series whose shares follow a target profile, and their
expected top-0.01% output is computed both ways (pooled and per unit).
"""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import aggregation
from .errors import InsufficientPopulationError, ValidationError
from .indicators import LevelLike, ResearchUnit, as_level
from .rng import ALGORITHM, MASK64, StreamBank, derive_seed

PROFILE_KINDS = ("linear", "usa", "uk", "split")
UNITS_PER_INSTITUTION = 20
MAX_RESAMPLE_ROUNDS = 16


@dataclass(frozen=True)
class CitationSeries:
    unit_index: int  # 1-based
    mu: float
    values: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class WorldModel:
    series: list[CitationSeries]
    sigma: float
    seed: int
    threshold_cache: dict = field(default_factory=dict, repr=False)

    @property
    def total_values(self) -> int:
        return sum(len(s) for s in self.series)

    def pooled(self) -> np.ndarray:
        return np.concatenate([s.values for s in self.series])

    @property
    def parameters(self) -> dict:
        return {
            "n_series": len(self.series),
            "per_series": len(self.series[0]),
            "mu_max": self.series[0].mu,
            "mu_min": self.series[-1].mu,
            "sigma": self.sigma,
            "seed": self.seed,
            "prng": ALGORITHM,
        }


def ramp_mu(i: int, n_series: int, mu_max: float, mu_min: float) -> float:
    """Location of series ``i`` (1-based) on the linear ramp."""
    return mu_max - (mu_max - mu_min) * (i - 1) / (n_series - 1)


def build_world(
    n_series: int = 400,
    per_series: int = 200,
    mu_max: float = 4.0,
    mu_min: float = 2.0,
    sigma: float = 1.1,
    seed: int = 0,
) -> WorldModel:
    """Sample the synthetic world; series ``k`` draws from stream ``splitmix64(seed + k)``.

    Exact duplicate values would make rank thresholds ambiguous.  Any series
    holding a duplicate draws a fresh block from its own stream; this
    practically never happens with 64-bit floats.
    """
    if n_series < 2:
        raise ValidationError(f"need at least 2 series, got {n_series}")
    if per_series < 1:
        raise ValidationError(f"need at least 1 value per series, got {per_series}")
    if not mu_max > mu_min:
        raise ValidationError(f"mu_max ({mu_max}) must exceed mu_min ({mu_min})")
    if not sigma > 0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    if not 0 <= seed <= MASK64:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")

    mus = np.array([ramp_mu(i, n_series, mu_max, mu_min) for i in range(1, n_series + 1)])
    bank = StreamBank.derived(seed, n_series)
    values = np.exp(mus[:, None] + sigma * bank.normals(per_series))

    for _ in range(MAX_RESAMPLE_ROUNDS):
        flat = values.ravel()
        order = np.argsort(flat, kind="stable")
        dup = np.flatnonzero(flat[order][1:] == flat[order][:-1])
        if dup.size == 0:
            break
        rows = np.unique(np.concatenate([order[dup], order[dup + 1]]) // per_series)
        # the bank advances every stream; only offending rows take the new block
        fresh = np.exp(mus[:, None] + sigma * bank.normals(per_series))
        values[rows] = fresh[rows]
    else:
        raise RuntimeError("could not generate a duplicate-free world")

    series = [CitationSeries(i + 1, float(mus[i]), values[i]) for i in range(n_series)]
    return WorldModel(series, sigma, seed)


def top_rank(total: int, level: LevelLike) -> int:
    """``floor(total * x / 100)``, guarded against binary rounding of ``x``."""
    x = as_level(level).x
    return int(math.floor(total * x / 100.0 * (1 + 1e-12)))


def world_threshold(world: WorldModel, level: LevelLike) -> float:
    """Value at descending rank ``floor(N x / 100)``; the top x% is everything >= it."""
    level = as_level(level)
    if level.x in world.threshold_cache:
        return world.threshold_cache[level.x]
    pooled = world.pooled()
    k = top_rank(pooled.size, level)
    if k < 1:
        raise InsufficientPopulationError(
            f"{level} of {pooled.size} values selects no value; use a larger world or level"
        )
    value = float(np.partition(pooled, pooled.size - k)[pooled.size - k])
    world.threshold_cache[level.x] = value
    return value


@dataclass(frozen=True)
class UnitCount:
    unit_index: int
    count: int
    ratio: float


def unit_top_counts(world: WorldModel, level: LevelLike = 10) -> list[UnitCount]:
    threshold = world_threshold(world, level)
    out = []
    for s in world.series:
        count = int(np.count_nonzero(s.values >= threshold))
        out.append(UnitCount(s.unit_index, count, count / len(s)))
    return out


@dataclass(frozen=True)
class SelectionProfile:
    kind: str
    target_ratios: tuple[float, ...]
    parameters: dict

    def __post_init__(self):
        t = self.target_ratios
        if len(t) != UNITS_PER_INSTITUTION:
            raise ValidationError(f"profile needs {UNITS_PER_INSTITUTION} targets, got {len(t)}")
        if any(b > a for a, b in zip(t, t[1:])):
            raise ValidationError("profile targets must be nonincreasing in rank")


DEFAULT_PROFILE_PARAMETERS = {
    "linear": {"high": 0.30, "low": 0.02},
    "usa": {"floor": 0.06, "span": 0.22, "midpoint": 8.0, "width": 2.0},
    "uk": {"floor": 0.07, "span": 0.14, "midpoint": 12.0, "width": 4.0},
    "split": {"high": 0.22, "n_high": 7, "ramp_from": 0.18, "ramp_to": 0.06, "n_ramp": 6,
              "low": 0.03, "n_low": 7},
}


def _logistic(floor, span, midpoint, width):
    return [floor + span / (1 + math.exp((r - midpoint) / width))
            for r in range(1, UNITS_PER_INSTITUTION + 1)]


def make_profile(kind: str, pool_ratios: Optional[Sequence[float]] = None, **overrides) -> SelectionProfile:
    """Target ratio-versus-rank curve for a synthetic 20-unit institution.

    ``pool_ratios`` is accepted for interface symmetry with selection; the
    default curves are fixed and do not adapt to the pool.
    """
    if kind not in DEFAULT_PROFILE_PARAMETERS:
        raise ValidationError(f"unknown profile {kind!r}; choose from {', '.join(PROFILE_KINDS)}")
    if pool_ratios is not None and len(pool_ratios) == 0:
        raise ValidationError("pool of ratios is empty")
    params = {**DEFAULT_PROFILE_PARAMETERS[kind], **overrides}
    if kind == "linear":
        targets = np.linspace(params["high"], params["low"], UNITS_PER_INSTITUTION).tolist()
    elif kind in ("usa", "uk"):
        targets = _logistic(params["floor"], params["span"], params["midpoint"], params["width"])
    else:
        n_high, n_ramp, n_low = params["n_high"], params["n_ramp"], params["n_low"]
        if n_high + n_ramp + n_low != UNITS_PER_INSTITUTION:
            raise ValidationError("split profile segment sizes must add up to 20")
        targets = (
            [params["high"]] * n_high
            + np.linspace(params["ramp_from"], params["ramp_to"], n_ramp).tolist()
            + [params["low"]] * n_low
        )
    return SelectionProfile(kind, tuple(float(t) for t in targets), params)


def select_units(targets: Sequence[float], pool: Sequence[tuple[int, float]]) -> list[int]:
    """Greedy nearest-ratio matching in target order, without replacement.

    ``targets`` may be a :class:`SelectionProfile` or a plain list.  Ties on
    distance go to the lower unit index.
    """
    if isinstance(targets, SelectionProfile):
        targets = targets.target_ratios
    if len(pool) < len(targets):
        raise ValidationError(f"pool of {len(pool)} units cannot supply {len(targets)} selections")
    remaining = sorted(pool)
    chosen = []
    for target in targets:
        best = min(range(len(remaining)), key=lambda j: (abs(remaining[j][1] - target), remaining[j][0]))
        chosen.append(remaining.pop(best)[0])
    return chosen


@dataclass(frozen=True)
class ExperimentResult:
    kind: str
    seed: int
    level: float
    pooled_ratio: float
    afcl: float
    cfal: float
    gap_factor: float
    selected: tuple[int, ...]
    top10_counts: tuple[int, ...]
    profile_parameters: dict = field(default_factory=dict)


def institution_units(world: WorldModel, counts: Sequence[UnitCount], selected: Sequence[int]):
    by_index = {c.unit_index: c for c in counts}
    size = len(world.series[0])
    return [ResearchUnit(f"series-{i}", size, by_index[i].count) for i in selected]


def run_experiment(
    kind: str,
    seed: int,
    level: LevelLike = 0.01,
    world_kwargs: Optional[dict] = None,
    profile_overrides: Optional[dict] = None,
) -> ExperimentResult:
    level = as_level(level)
    profile = make_profile(kind, **(profile_overrides or {}))
    world = build_world(seed=seed, **(world_kwargs or {}))
    counts = unit_top_counts(world, 10)
    selected = select_units(profile, [(c.unit_index, c.ratio) for c in counts])
    units = institution_units(world, counts, selected)
    gap = aggregation.ineq4_gap(units, level)
    return ExperimentResult(
        kind=kind,
        seed=seed,
        level=level.x,
        pooled_ratio=gap.pooled_ratio,
        afcl=gap.afcl,
        cfal=gap.cfal,
        gap_factor=gap.gap_factor,
        selected=tuple(selected),
        top10_counts=tuple(int(u.p_top10) for u in units),
        profile_parameters=dict(profile.parameters),
    )


@dataclass(frozen=True)
class StudySummary:
    kind: str
    master_seed: int
    level: float
    results: list[ExperimentResult]
    quantiles: dict  # metric -> {"q10", "median", "q90"}

    def median(self, metric: str) -> float:
        return self.quantiles[metric]["median"]


SUMMARY_METRICS = ("pooled_ratio", "afcl", "cfal", "gap_factor")


def _quantiles(values: Sequence[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    return {
        "q10": float(np.quantile(arr, 0.1)),
        "median": float(statistics.median(values)),
        "q90": float(np.quantile(arr, 0.9)),
    }


def replicate_seeds(master_seed: int, n_replicates: int) -> list[int]:
    return [derive_seed(master_seed, r) for r in range(n_replicates)]


def replicate_study(
    kind: str,
    master_seed: int,
    n_replicates: int,
    level: LevelLike = 0.01,
    workers: int = 1,
    **kwargs,
) -> StudySummary:
    """Independent replicates of :func:`run_experiment` with derived seeds.

    Output is independent of ``workers``: each replicate owns its seed and
    results are kept in replicate order.
    """
    if n_replicates < 1:
        raise ValidationError(f"need at least one replicate, got {n_replicates}")
    level = as_level(level)
    seeds = replicate_seeds(master_seed, n_replicates)

    def one(s):
        return run_experiment(kind, s, level, **kwargs)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    quantiles = {m: _quantiles([getattr(r, m) for r in results]) for m in SUMMARY_METRICS}
    return StudySummary(kind, master_seed, level.x, results, quantiles)
