"""Inactivity-threshold calibration against LMS time, plus the small
regression and correlation routines it needs.

For each candidate threshold the whole-course WeBWorK hours of every
student are paired with their LMS hours. Students whose LMS time is below
half their WeBWorK time (they reached WeBWorK without the LMS) are dropped,
a least-squares line is fitted, and the threshold whose slope is nearest 1
is selected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .errors import DegenerateInput, NoValidRows
from .sessions import threshold_seconds, total_hours_array

DEFAULT_RATIO = 0.5
DEFAULT_GRID = (0.10, 2.00, 0.05)


@dataclass(frozen=True)
class PairedSample:
    user_ids: tuple
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1 or len(self.user_ids) != x.size:
            raise ValueError("user_ids, x and y must be 1-d and equally long")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("paired values must be finite")
        if np.any(x < 0) or np.any(y < 0):
            raise ValueError("paired values must be non-negative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "user_ids", tuple(self.user_ids))

    @classmethod
    def from_points(cls, points):
        """Build from ``(x, y)`` or ``(user_id, x, y)`` tuples."""
        points = list(points)
        if points and len(points[0]) == 2:
            points = [(str(i), x, y) for i, (x, y) in enumerate(points)]
        ids = tuple(p[0] for p in points)
        return cls(ids, np.array([p[1] for p in points], dtype=float),
                   np.array([p[2] for p in points], dtype=float))

    def __len__(self):
        return self.x.size

    def subset(self, mask) -> "PairedSample":
        mask = np.asarray(mask, dtype=bool)
        ids = tuple(u for u, keep in zip(self.user_ids, mask) if keep)
        return PairedSample(ids, self.x[mask], self.y[mask])


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    slope_ci95: tuple
    pearson_r: float
    n_used: int
    slope_se: float = 0.0

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_ci95": list(self.slope_ci95),
            "slope_se": self.slope_se,
            "pearson_r": None if math.isnan(self.pearson_r) else self.pearson_r,
            "n_used": self.n_used,
        }


@dataclass(frozen=True)
class SweepRow:
    theta: float
    slope: Optional[float]
    mean_total_hours: float
    n_retained: int
    fit: Optional[FitResult] = None


@dataclass
class CalibrationResult:
    theta_star: float
    sweep: list
    fit_at_star: FitResult
    retained: tuple = field(default=())
    removed: tuple = field(default=())


def filter_outliers(sample: PairedSample, ratio: float = DEFAULT_RATIO) -> PairedSample:
    """Keep points with ``y >= ratio * x``."""
    if not 0 < ratio <= 1:
        raise ValueError(f"ratio must be in (0, 1], got {ratio}")
    return sample.subset(sample.y >= ratio * sample.x)


def pearson(sample: PairedSample) -> float:
    n = len(sample)
    if n < 2:
        raise DegenerateInput(f"pearson needs at least 2 points, got {n}")
    dx = sample.x - sample.x.mean()
    dy = sample.y - sample.y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise DegenerateInput("pearson undefined for a constant coordinate")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def ols_fit(sample: PairedSample) -> FitResult:
    """Least-squares ``y = slope * x + intercept`` with a two-sided 95% CI
    on the slope from Student's t with n - 2 degrees of freedom."""
    n = len(sample)
    if n < 3:
        raise DegenerateInput(f"ols_fit needs at least 3 points, got {n}")
    x, y = sample.x, sample.y
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    if sxx == 0:
        raise DegenerateInput("ols_fit undefined for constant x")
    slope = float(dx @ dy) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    sse = float(resid @ resid)
    se = math.sqrt(sse / (n - 2) / sxx)
    half = float(stats.t.ppf(0.975, n - 2)) * se
    syy = float(dy @ dy)
    r = float(dx @ dy) / math.sqrt(sxx * syy) if syy > 0 else float("nan")
    return FitResult(slope, intercept, (slope - half, slope + half), r, n, se)


def make_grid(lo: float = DEFAULT_GRID[0], hi: float = DEFAULT_GRID[1],
              step: float = DEFAULT_GRID[2]) -> list:
    """Inclusive threshold grid, rounded so 0.95 is 0.95 and not 0.9500000001."""
    if not (lo > 0 and hi >= lo and step > 0):
        raise ValueError(f"bad grid {lo}:{hi}:{step}")
    n = int(math.floor((hi - lo) / step + 1e-9))
    return [round(lo + i * step, 10) for i in range(n + 1)]


def paired_hours(course_hours: dict, lms_hours: dict) -> PairedSample:
    """Pair WeBWorK and LMS hours; users absent from the LMS table are left out."""
    ids = [u for u in sorted(course_hours) if u in lms_hours]
    return PairedSample(tuple(ids),
                        np.array([course_hours[u] for u in ids], dtype=float),
                        np.array([lms_hours[u] for u in ids], dtype=float))


def sweep_thresholds(timelines: dict, lms_hours: dict, grid: Sequence[float] = None,
                     ratio: float = DEFAULT_RATIO) -> list:
    """One :class:`SweepRow` per threshold, in ascending threshold order.

    ``timelines`` maps user id to the sorted whole-course epoch array
    (see :func:`wwlogs.sessions.user_timelines`). The mean total is taken
    over every user before outlier removal; a grid point whose fit is
    degenerate gets ``slope=None``.
    """
    grid = make_grid() if grid is None else sorted(float(t) for t in grid)
    if not grid:
        raise ValueError("empty threshold grid")
    for theta in grid:
        threshold_seconds(theta)
    rows = []
    for theta in grid:
        totals = {u: total_hours_array(ts, theta) for u, ts in timelines.items()}
        mean_total = float(np.mean(list(totals.values()))) if totals else 0.0
        kept = filter_outliers(paired_hours(totals, lms_hours), ratio)
        try:
            fit = ols_fit(kept)
        except DegenerateInput:
            fit = None
        rows.append(SweepRow(theta, fit.slope if fit else None, mean_total, len(kept), fit))
    return rows


def select_threshold(sweep: Sequence[SweepRow]) -> float:
    """Threshold whose slope is nearest 1; the smaller threshold wins ties."""
    valid = [r for r in sweep if r.slope is not None and math.isfinite(r.slope)]
    if not valid:
        raise NoValidRows("no threshold produced a usable fit")
    # rounding keeps |1.1 - 1| and |0.9 - 1| an exact tie
    best = min(valid, key=lambda r: (round(abs(r.slope - 1.0), 12), r.theta))
    return best.theta


def calibrate(timelines: dict, lms_hours: dict, grid: Sequence[float] = None,
              ratio: float = DEFAULT_RATIO) -> CalibrationResult:
    sweep = sweep_thresholds(timelines, lms_hours, grid, ratio)
    theta_star = select_threshold(sweep)
    row = next(r for r in sweep if r.theta == theta_star)
    totals = {u: total_hours_array(ts, theta_star) for u, ts in timelines.items()}
    sample = paired_hours(totals, lms_hours)
    kept = filter_outliers(sample, ratio)
    removed = tuple(u for u in sample.user_ids if u not in set(kept.user_ids))
    return CalibrationResult(theta_star, sweep, row.fit, kept.user_ids, removed)


