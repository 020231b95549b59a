import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from wwlogs.calibration import (
    PairedSample,
    SweepRow,
    filter_outliers,
    make_grid,
    ols_fit,
    pearson,
    select_threshold,
    sweep_thresholds,
    calibrate,
)
from wwlogs.errors import DegenerateInput, NoValidRows, NonPositiveThreshold


def sample(*points):
    return PairedSample.from_points(points)


def test_filter_predicate():
    kept = filter_outliers(sample(("a", 30, 10), ("b", 19, 10), ("c", 0, 0)))
    assert kept.user_ids == ("b", "c")


def test_filter_keeps_all_when_lms_dominates():
    s = sample((1, 2), (3, 3), (5, 9))
    assert filter_outliers(s).user_ids == s.user_ids


@given(st.lists(st.tuples(st.floats(0, 100), st.floats(0, 100)), max_size=40),
       st.floats(0.01, 1.0))
def test_filter_set_equality(points, ratio):
    s = sample(*points)
    kept = set(filter_outliers(s, ratio).user_ids)
    assert kept == {u for u, x, y in zip(s.user_ids, s.x, s.y) if y >= ratio * x}


def test_exact_line():
    fit = ols_fit(sample((0, 0), (1, 2), (2, 4)))
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(0.0, abs=1e-12)
    assert fit.slope_ci95[1] - fit.slope_ci95[0] == pytest.approx(0.0, abs=1e-12)


def test_hand_fit():
    # xbar=2, ybar=10/3, Sxy=3, Sxx=2, Syy=14/3
    s = sample((1, 2), (2, 3), (3, 5))
    fit = ols_fit(s)
    assert fit.slope == pytest.approx(1.5, abs=1e-9)
    assert fit.intercept == pytest.approx(1 / 3, abs=1e-9)
    assert pearson(s) == pytest.approx(3 / math.sqrt(2 * 14 / 3), abs=1e-9)
    assert round(pearson(s), 3) == 0.982


def test_ci_matches_scipy_linregress():
    rng = np.random.default_rng(5)
    x = rng.uniform(0, 50, 40)
    y = 1.1 * x + rng.normal(0, 4, 40)
    fit = ols_fit(PairedSample(tuple(map(str, range(40))), x, np.abs(y)))
    ref = stats.linregress(x, np.abs(y))
    half = stats.t.ppf(0.975, 38) * ref.stderr
    assert fit.slope == pytest.approx(ref.slope, rel=1e-12)
    assert fit.slope_ci95 == pytest.approx((ref.slope - half, ref.slope + half), rel=1e-10)
    assert fit.pearson_r == pytest.approx(ref.rvalue, rel=1e-12)
    assert fit.slope_ci95[0] <= fit.slope <= fit.slope_ci95[1]


def test_degenerate_inputs():
    with pytest.raises(DegenerateInput):
        ols_fit(sample((1, 1), (1, 2), (1, 3)))
    with pytest.raises(DegenerateInput):
        ols_fit(sample((1, 1), (2, 2)))
    with pytest.raises(DegenerateInput):
        pearson(sample((1, 2), (2, 2), (3, 2)))
    assert pearson(sample((1, 1), (2, 2), (3, 3))) == pytest.approx(1.0)


pts = st.lists(st.tuples(st.floats(0, 100), st.floats(0, 100)), min_size=3, max_size=30)


@given(pts, st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0, 10), st.floats(0, 10))
def test_affine_invariance(points, ax, ay, bx, by):
    s = sample(*points)
    if np.ptp(s.x) < 1e-3 or np.ptp(s.y) < 1e-3:
        return
    t = PairedSample(s.user_ids, ax * s.x + bx, ay * s.y + by)
    assert pearson(t) == pytest.approx(pearson(s), abs=1e-7)
    assert ols_fit(t).slope == pytest.approx(ols_fit(s).slope * ay / ax, rel=1e-6, abs=1e-9)


def test_grid():
    grid = make_grid()
    assert grid[0] == 0.1 and grid[-1] == 2.0 and len(grid) == 39
    assert 0.95 in grid
    assert make_grid(0.5, 0.5, 0.1) == [0.5]


def test_select_examples():
    rows = [SweepRow(0.90, 1.20, 0, 3), SweepRow(0.95, 1.005, 0, 3), SweepRow(1.00, 0.95, 0, 3)]
    assert select_threshold(rows) == 0.95
    assert select_threshold(rows[:1]) == 0.90
    assert select_threshold([SweepRow(1.5, 0.9, 0, 3), SweepRow(0.5, 1.1, 0, 3)]) == 0.5


def test_select_skips_missing_and_fails_when_none():
    assert select_threshold([SweepRow(0.2, None, 0, 0), SweepRow(0.3, 2.0, 0, 5)]) == 0.3
    with pytest.raises(NoValidRows):
        select_threshold([SweepRow(0.2, None, 0, 0)])


@given(st.permutations([SweepRow(t / 10, s, 0, 3) for t, s in
                        [(1, 1.3), (2, 0.8), (3, 1.2), (4, 0.95), (5, 1.05)]]))
def test_select_order_invariant(rows):
    assert select_threshold(rows) == 0.4


def _timelines():
    # within-session steps 0.25 h, breaks 3 h; true hours 1.0 (a), 0.5 (b), 1.5 (c), 1.0 (d)
    def build(blocks):
        out, t = [], 0
        for n in blocks:
            out += [t + 900 * i for i in range(n + 1)]
            t = out[-1] + 3 * 3600
        return np.array(out, dtype=np.int64)

    return {"a": build([2, 2]), "b": build([2]), "c": build([2, 2, 2]), "d": build([4])}


def test_sweep_plateau_and_monotone_mean():
    tl = _timelines()
    lms = {"a": 1.0, "b": 0.5, "c": 1.5, "d": 0.2}
    rows = sweep_thresholds(tl, lms, make_grid(0.1, 2.0, 0.05))
    assert [r.theta for r in rows] == sorted(r.theta for r in rows)
    plateau = [r for r in rows if 0.25 <= r.theta < 3.0]
    assert all(r.slope == pytest.approx(1.0, abs=1e-12) for r in plateau)
    assert all(r.n_retained == 3 for r in plateau)
    means = [r.mean_total_hours for r in rows]
    assert means == sorted(means)
    assert rows[0].slope is None  # every total is zero below one step


def test_sweep_single_point_and_bad_grid():
    tl = _timelines()
    rows = sweep_thresholds(tl, {"a": 1.0, "b": 0.5, "c": 1.5}, [0.5])
    assert len(rows) == 1 and rows[0].theta == 0.5
    with pytest.raises(NonPositiveThreshold):
        sweep_thresholds(tl, {}, [0.0])


def test_users_without_lms_left_out():
    res = calibrate(_timelines(), {"a": 1.0, "b": 0.5, "c": 1.5}, [0.5, 1.0])
    assert res.theta_star == 0.5
    assert res.fit_at_star.n_used == 3
    assert "d" not in res.retained and "d" not in res.removed
