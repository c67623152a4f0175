"""Observables of a finished market: histograms, CCDFs, fits, classes, ranks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_CLASS_BOUNDS = (500.0, 2000.0)
CLASS_NAMES = ("poor", "middle", "rich")


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray


@dataclass(frozen=True)
class Ccdf:
    money_levels: np.ndarray
    prob_geq: np.ndarray

    def __len__(self):
        return len(self.money_levels)


@dataclass(frozen=True)
class ClassBreakdown:
    bounds: tuple[float, float]
    population_share: dict[str, float]
    money_share: dict[str, float]
    n_included: int


@dataclass(frozen=True)
class FitResult:
    model: str
    parameter: float
    fit_range: tuple[float, float]
    r_squared: float
    n_points: int
    flagged: bool = False  # slope >= 0: the data do not decay like the model


@dataclass(frozen=True)
class WinLossProfile:
    agent_index: np.ndarray
    losses: np.ndarray
    net_wins: np.ndarray
    money: np.ndarray


def _included(balances, include) -> np.ndarray:
    b = np.asarray(balances, dtype=np.float64)
    if include is None:
        sel = b
    elif isinstance(include, np.ndarray):
        sel = b[include]
    else:
        sel = b[np.fromiter(sorted(include), dtype=np.int64)]
    if sel.size == 0:
        raise ValueError("include set is empty")
    return sel


def active_set(n_agents: int, passive: Iterable[int]) -> np.ndarray:
    mask = np.ones(n_agents, dtype=bool)
    mask[list(passive)] = False
    return np.flatnonzero(mask)


def histogram(balances, include=None, n_bins: int = 50, range: tuple[float, float] = (0.0, 5000.0)) -> Histogram:
    """Equal-width histogram on ``[lo, hi)``.

    Values below ``lo`` land in the first bin and values at or above ``hi``
    in the last, so every included agent is counted.
    """
    lo, hi = range
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    if not lo < hi:
        raise ValueError("range must satisfy lo < hi")
    vals = _included(balances, include)
    edges = np.linspace(lo, hi, n_bins + 1)
    idx = np.floor((vals - lo) / (hi - lo) * n_bins).astype(np.int64)
    idx = np.clip(idx, 0, n_bins - 1)
    return Histogram(edges, np.bincount(idx, minlength=n_bins))


def ccdf(balances, include=None) -> Ccdf:
    """Empirical P(money >= m) at every distinct included balance."""
    vals = np.sort(_included(balances, include))
    n = vals.size
    levels, first = np.unique(vals, return_index=True)
    return Ccdf(levels, (n - first) / n)


def classify(balances, include=None, bounds: tuple[float, float] = DEFAULT_CLASS_BOUNDS) -> ClassBreakdown:
    poor_upper, middle_upper = bounds
    if not 0 < poor_upper < middle_upper:
        raise ValueError("class bounds must satisfy 0 < poor_upper < middle_upper")
    vals = _included(balances, include)
    masks = (vals < poor_upper, (vals >= poor_upper) & (vals < middle_upper), vals >= middle_upper)
    total = math.fsum(vals)
    n = vals.size
    pop = {name: int(np.count_nonzero(m)) / n for name, m in zip(CLASS_NAMES, masks)}
    if total > 0:
        money = {name: math.fsum(vals[m]) / total for name, m in zip(CLASS_NAMES, masks)}
    else:
        money = {name: 0.0 for name in CLASS_NAMES}
    return ClassBreakdown((float(poor_upper), float(middle_upper)), pop, money, n)


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Slope and coefficient of determination of y on x."""
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(np.dot(xc, xc))
    syy = float(np.dot(yc, yc))
    sxy = float(np.dot(xc, yc))
    if sxx == 0:
        raise FitError("fit abscissae are all equal")
    slope = sxy / sxx
    r2 = 1.0 if syy == 0 else min(1.0, sxy * sxy / (sxx * syy))
    return slope, r2


def default_exponential_range(c: Ccdf, min_prob: float = 0.01) -> tuple[float, float]:
    keep = c.money_levels[c.prob_geq >= min_prob]
    if keep.size == 0:
        raise FitError(f"no CCDF levels with probability >= {min_prob}")
    return float(keep[0]), float(keep[-1])


def fit_exponential(c: Ccdf, fit_range: tuple[float, float] | None = None) -> FitResult:
    """Least squares of ln P(>=m) on m; the effective temperature is -1/slope."""
    lo, hi = fit_range if fit_range is not None else default_exponential_range(c)
    m = (c.money_levels >= lo) & (c.money_levels <= hi) & (c.prob_geq > 0)
    if np.count_nonzero(m) < 3:
        raise FitError(f"need at least 3 CCDF levels in [{lo}, {hi}]")
    x = c.money_levels[m]
    slope, r2 = _ols(x, np.log(c.prob_geq[m]))
    flagged = not slope < 0
    temp = -1.0 / slope if slope != 0 else math.inf
    return FitResult("exponential", temp, (float(lo), float(hi)), r2, int(m.sum()), flagged)


def fit_pareto(c: Ccdf, tail_threshold: float, upper: float | None = None) -> FitResult:
    """Least squares of ln P(>=m) on ln m for ``tail_threshold <= m <= upper``.

    Two-segment tails are fitted with two calls over adjacent ranges.
    """
    if tail_threshold <= 0:
        raise ValueError("tail_threshold must be positive")
    hi = float(c.money_levels[-1]) if upper is None else float(upper)
    m = (c.money_levels >= tail_threshold) & (c.money_levels <= hi) & (c.prob_geq > 0)
    if np.count_nonzero(m) < 3:
        raise FitError(f"need at least 3 CCDF levels in [{tail_threshold}, {hi}]")
    slope, r2 = _ols(np.log(c.money_levels[m]), np.log(c.prob_geq[m]))
    return FitResult("pareto", -slope, (float(tail_threshold), hi), r2, int(m.sum()), not slope < 0)


def hill_estimator(balances, include=None, tail_threshold: float = 2000.0) -> float:
    """Hill estimate of the Pareto tail exponent over values >= threshold."""
    vals = _included(balances, include)
    tail = vals[vals >= tail_threshold]
    if tail.size < 2:
        raise FitError("need at least 2 tail values for the Hill estimator")
    logs = np.log(tail / tail_threshold)
    s = float(logs.sum())
    if s == 0:
        raise FitError("tail values all equal the threshold")
    return tail.size / s


def winloss_profile(activity, balances: Sequence[float]) -> WinLossProfile:
    """Agents ranked by final money, richest first; ties by index."""
    b = np.asarray(balances, dtype=np.float64)
    if len(activity) != b.size:
        raise ValueError(f"activity has {len(activity)} agents but balances has {b.size}")
    # lexsort sorts by the last key first; index ascending breaks ties.
    order = np.lexsort((np.arange(b.size), -b))
    ti = np.asarray(activity.times_i)[order]
    tj = np.asarray(activity.times_j)[order]
    return WinLossProfile(order, ti, tj - ti, b[order])
