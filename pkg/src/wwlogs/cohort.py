"""Two-group comparisons: score split, descriptive statistics, pooled-SD
Cohen's d and plot-ready histogram/box summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BadEdges, DegenerateInput, EmptyInput, UnknownMetricName
from .metrics import metric_names

DEFAULT_CUT = 0.5
DEFAULT_BINS = 20


@dataclass(frozen=True)
class GroupSplit:
    low: frozenset
    high: frozenset
    cut: float = DEFAULT_CUT


@dataclass(frozen=True)
class Description:
    n: int
    mean: float
    sd: Optional[float]
    median: float
    q1: float
    q3: float


@dataclass(frozen=True)
class MetricComparison:
    metric: str
    low: Optional[Description]
    high: Optional[Description]
    cohens_d: Optional[float]

    def cell(self, group: str) -> str:
        desc = self.low if group == "low" else self.high
        if desc is None:
            return ""
        sd = "" if desc.sd is None else f"{desc.sd:.3g}"
        return f"{desc.mean:.3g}({sd})"


@dataclass(frozen=True)
class Histogram:
    edges: tuple
    counts: tuple
    underflow: int = 0
    overflow: int = 0


def split_groups(aggregates, cut: float = DEFAULT_CUT) -> GroupSplit:
    """Scores strictly below ``cut`` go low, the rest high; students with
    no score are in neither group."""
    if not 0 < cut < 1:
        raise ValueError(f"cut must be in (0, 1), got {cut}")
    low, high = set(), set()
    for a in aggregates:
        if a.ww_score_fraction is None:
            continue
        (low if a.ww_score_fraction < cut else high).add(a.user_id)
    return GroupSplit(frozenset(low), frozenset(high), cut)


def describe(values) -> Description:
    """n, mean, sample SD (n - 1), median and linearly interpolated quartiles."""
    v = np.asarray([x for x in values], dtype=float)
    if v.size == 0:
        raise EmptyInput("describe() needs at least one value")
    sd = float(np.std(v, ddof=1)) if v.size >= 2 else None
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return Description(int(v.size), float(v.mean()), sd, float(med), float(q1), float(q3))


def cohens_d(group_a, group_b) -> float:
    """Standardized mean difference of two ``(mean, sd, n)`` triples using
    the pooled standard deviation."""
    mean_a, sd_a, n_a = group_a
    mean_b, sd_b, n_b = group_b
    if n_a < 2 or n_b < 2:
        raise DegenerateInput("Cohen's d needs at least 2 values per group")
    pooled = ((n_a - 1) * sd_a ** 2 + (n_b - 1) * sd_b ** 2) / (n_a + n_b - 2)
    if pooled <= 0:
        raise DegenerateInput("Cohen's d undefined when both groups have zero spread")
    return (mean_a - mean_b) / math.sqrt(pooled)


def default_edges(values, bins: int = DEFAULT_BINS) -> list:
    v = np.asarray(list(values), dtype=float)
    if v.size == 0:
        return [0.0, 1.0]
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return list(np.linspace(lo, hi, bins + 1))


def histogram(values, bin_edges: Sequence[float]) -> Histogram:
    """Counts in half-open bins ``[e_i, e_i+1)``; the last bin is closed.
    Values outside the edges are tallied as under/overflow."""
    edges = np.asarray(list(bin_edges), dtype=float)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise BadEdges("need at least 2 strictly increasing edges")
    v = np.asarray(list(values), dtype=float)
    under = int(np.sum(v < edges[0]))
    over = int(np.sum(v > edges[-1]))
    inside = v[(v >= edges[0]) & (v <= edges[-1])]
    idx = np.searchsorted(edges, inside, side="right") - 1
    idx[idx == edges.size - 1] = edges.size - 2
    counts = np.bincount(idx, minlength=edges.size - 1)
    return Histogram(tuple(float(e) for e in edges), tuple(int(c) for c in counts), under, over)


def metric_values(aggregates, metric: str, users) -> list:
    return [
        getattr(a, metric) for a in aggregates
        if a.user_id in users and getattr(a, metric) is not None
    ]


def compare_table(split: GroupSplit, aggregates, metrics: Sequence[str]) -> list:
    """One :class:`MetricComparison` per requested metric, in request order.

    Each group only contributes students for whom the metric is defined.
    ``cohens_d`` is low minus high, or ``None`` when it cannot be computed.
    """
    known = set(metric_names())
    unknown = [m for m in metrics if m not in known]
    if unknown:
        raise UnknownMetricName(f"unknown metric(s): {', '.join(unknown)}")
    aggregates = list(aggregates)
    out = []
    for metric in metrics:
        lo = metric_values(aggregates, metric, split.low)
        hi = metric_values(aggregates, metric, split.high)
        d_lo = describe(lo) if lo else None
        d_hi = describe(hi) if hi else None
        d = None
        if d_lo and d_hi and d_lo.sd is not None and d_hi.sd is not None:
            try:
                d = cohens_d((d_lo.mean, d_lo.sd, d_lo.n), (d_hi.mean, d_hi.sd, d_hi.n))
            except DegenerateInput:
                d = None
        out.append(MetricComparison(metric, d_lo, d_hi, d))
    return out


def group_histograms(split: GroupSplit, aggregates, metric: str, edges=None) -> dict:
    """Low/high histograms of one metric on shared edges (pooled range by default)."""
    aggregates = list(aggregates)
    lo = metric_values(aggregates, metric, split.low)
    hi = metric_values(aggregates, metric, split.high)
    if edges is None:
        edges = default_edges(lo + hi)
    return {"low": histogram(lo, edges), "high": histogram(hi, edges)}
