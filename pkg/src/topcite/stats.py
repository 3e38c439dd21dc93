"""Lognormal sampling and fitting, KS lognormality test, least-squares fits."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import special

from .errors import DegenerateSampleError, DomainError, RankDeficiencyError, ValidationError
from .indicators import LevelLike, as_level
from .rng import RandomStream


@dataclass(frozen=True)
class LognormalParams:
    """Natural-log location and scale: ``ln(value) ~ N(mu, sigma**2)``."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")

    @property
    def median(self) -> float:
        return math.exp(self.mu)


@dataclass(frozen=True)
class KsResult:
    d: float
    p_value: float
    n: int
    fitted: LognormalParams


@dataclass(frozen=True)
class PolyFit:
    coefficients: tuple[float, ...]  # highest power first
    rss: float


@dataclass(frozen=True)
class PowerLawFit:
    ep: float
    slope: float
    intercept: float
    r_squared: float
    expected_intercept: float  # lg(P) + 2 lg(ep)
    levels_used: int


def sample_lognormal(params: LognormalParams, n: int, stream: RandomStream) -> np.ndarray:
    """``n`` continuous lognormal values; no rounding to integer citations."""
    if n < 1:
        raise ValidationError(f"sample size must be >= 1, got {n}")
    return np.exp(params.mu + params.sigma * stream.normals(n))


def _positive_logs(values: Iterable[float]) -> np.ndarray:
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    bad = np.flatnonzero(~(arr > 0))
    if bad.size:
        raise DomainError(f"values must be positive; item {bad[0]} is {arr[bad[0]]!r}")
    return np.log(arr)


def fit_lognormal(values: Iterable[float]) -> LognormalParams:
    logs = _positive_logs(values)
    if logs.size < 2:
        raise DegenerateSampleError(f"need at least 2 values to fit, got {logs.size}")
    return _fit_logs(logs)


def kolmogorov_pvalue(d: float, n: int) -> float:
    """Asymptotic two-sided p-value with effective size sqrt(n) + 0.12 + 0.11/sqrt(n)."""
    root = math.sqrt(n)
    lam = (root + 0.12 + 0.11 / root) * d
    return float(min(1.0, max(0.0, special.kolmogorov(lam))))


def ks_lognormal_test(values: Iterable[float]) -> KsResult:
    """KS distance between the sample and a lognormal fitted to it.

    The reference parameters come from the same sample, so the classical
    p-value is conservative (it overstates p).
    """
    logs = _positive_logs(values)
    n = logs.size
    if n < 3:
        raise DegenerateSampleError(f"KS test needs at least 3 values, got {n}")
    fitted = _fit_logs(logs)
    cdf = special.ndtr((np.sort(logs) - fitted.mu) / fitted.sigma)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))
    return KsResult(d, kolmogorov_pvalue(d, n), n, fitted)


def _fit_logs(logs: np.ndarray) -> LognormalParams:
    sigma = float(logs.std(ddof=1))
    if not sigma > 0:
        raise DegenerateSampleError("all values are equal; sigma would be 0")
    return LognormalParams(float(logs.mean()), sigma)


def fit_polynomial(xs: Sequence[float], ys: Sequence[float], degree: int) -> PolyFit:
    """Least squares via the normal equations on centred, scaled abscissae."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("xs and ys must be 1-D and of equal length")
    if x.size < degree + 1:
        raise RankDeficiencyError(f"degree {degree} fit needs {degree + 1} points, got {x.size}")
    shift = x.mean()
    scale = np.abs(x - shift).max() or 1.0
    t = (x - shift) / scale
    design = np.vander(t, degree + 1)
    normal = design.T @ design
    if np.linalg.matrix_rank(design) < degree + 1:
        raise RankDeficiencyError(f"abscissae admit no unique degree-{degree} fit")
    beta_t = np.linalg.solve(normal, design.T @ y)
    rss = float(np.sum((y - design @ beta_t) ** 2))
    # back to powers of x: p(x) = q((x - shift) / scale)
    q = np.poly1d(beta_t)
    p = q(np.poly1d([1.0 / scale, -shift / scale]))
    coeffs = np.concatenate([np.zeros(degree + 1 - p.coeffs.size), p.coeffs])
    return PolyFit(tuple(float(c) for c in coeffs), rss)


def fit_quadratic(xs: Sequence[float], ys: Sequence[float]) -> PolyFit:
    """``y = a x**2 + b x + c``; coefficients are ``(a, b, c)``."""
    return fit_polynomial(xs, ys, 2)


def fit_ep_powerlaw(counts: Iterable[tuple[LevelLike, float]], p_total: float) -> PowerLawFit:
    """Estimate the percentile power-law constant from counts at several levels.

    Fits ``lg N(x) = intercept + slope * lg x``; the constant is
    ``10 ** -slope``.  Levels with no papers cannot be logged and are dropped.
    """
    points = []
    for level, n in counts:
        level = as_level(level)
        if not n > 0:
            warnings.warn(f"dropping level {level.x:g}: paper count {n} is not positive")
            continue
        points.append((math.log10(level.x), math.log10(n)))
    if len({lx for lx, _ in points}) < 2:
        raise ValidationError("need at least 2 distinct levels with positive counts")
    lx = np.array([p[0] for p in points])
    ly = np.array([p[1] for p in points])
    mx, my = lx.mean(), ly.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    slope = float(np.sum((lx - mx) * (ly - my)) / sxx)
    intercept = float(my - slope * mx)
    ss_res = float(np.sum((ly - intercept - slope * lx) ** 2))
    ss_tot = float(np.sum((ly - my) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    ep = 10.0 ** (-slope)
    expected = math.log10(p_total) + 2 * math.log10(ep) if p_total > 0 else math.nan
    return PowerLawFit(ep, slope, intercept, r2, expected, len(points))
