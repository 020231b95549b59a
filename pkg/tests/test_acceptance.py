"""Acceptance gate: one PASS/FAIL line per criterion.

Run with pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from wwlogs.calibration import calibrate, ols_fit, pearson, PairedSample
from wwlogs.cohort import cohens_d, compare_table, split_groups
from wwlogs.ingest import (
    format_answer_line,
    format_login_line,
    infer_utc_offset,
    load_tables_dir,
    parse_answer_line,
    parse_login_line,
)
from wwlogs.pipeline import analyze, load_logs
from wwlogs.sessions import sessionize, time_on_task, user_timelines
from wwlogs.synth import ANSWER_LOG, LOGIN_LOG, GeneratorParams, generate_course, write_logs

RESULTS = {}

# (metric, (low mean, sd, n), (high mean, sd, n), published d)
PUBLISHED = [
    ("points per hour", (7.2, 4.7, 64), (5.1, 2.2, 209), 0.7),
    ("problems attempted per hour", (9.4, 6.2, 64), (5.8, 2.4, 209), 0.98),
    ("persistence time", (6.3, 9, 64), (14, 14, 209), -0.6),
    ("persistence attempts", (3.4, 1.7, 64), (4.6, 2.2, 209), -0.6),
    ("time per assignment", (0.91, 0.72, 64), (3.3, 1.4, 209), -1.89),
    ("session length", (0.37, 0.15, 64), (0.48, 0.12, 209), -0.89),
    ("sessions per assignment", (2.3, 1.5, 64), (6.9, 2.7, 209), -1.89),
    ("first to last submission", (1.1, 0.91, 64), (2.2, 1.3, 209), -0.84),
    ("time between sessions", (9.6, 9.5, 64), (8.9, 4.6, 209), 0.12),
    ("days before deadline", (2.3, 1.4, 64), (3.2, 1.8, 209), -0.55),
]
# excluded: the difficulty row, 35(2.1) vs 34(0.34) published as 0.29

FIRST_LINE = ("[Fri Dec 02 23:01:13 2016] |AMFFPSX4I202|Assignment_12|10|0 1480748473 "
              "(sqrt(3)/2)+pi/12")

CALIBRATION_PARAMS = GeneratorParams(seed=2016, n_students=200)


def record(key, ok, detail):
    RESULTS[key] = (bool(ok), detail)
    return ok


def gap_scan(ts, theta):
    ts = sorted(ts)
    if not ts:
        return []
    limit = theta * 3600
    out, start, prev, count = [], ts[0], ts[0], 1
    for t in ts[1:]:
        if t - prev > limit:
            out.append((start, prev, count))
            start, count = t, 0
        prev = t
        count += 1
    out.append((start, prev, count))
    return out


def random_stream(rng, theta, max_len=200):
    n = int(rng.integers(0, max_len + 1))
    gaps = rng.integers(0, int(10 * theta * 3600) + 1, size=n)
    return (1_000_000 + np.cumsum(gaps)).tolist()


def check_ac1():
    t0 = time.perf_counter()
    misses = []
    worst = 0.0
    for name, low, high, published in PUBLISHED:
        d = cohens_d(low, high)
        worst = max(worst, abs(d - published))
        if abs(d - published) > 0.08:
            misses.append(f"{name}: {d:.3f} vs {published}")
    elapsed = time.perf_counter() - t0
    ok = not misses and len(PUBLISHED) == 10 and elapsed < 1.0
    return record("AC1", ok, f"{len(PUBLISHED) - len(misses)}/10 rows within 0.08 "
                  f"(worst {worst:.3f}), {elapsed * 1000:.1f} ms"
                  + (f"; misses: {misses}" if misses else ""))


def check_ac2():
    event = parse_answer_line(FIRST_LINE)
    offset = infer_utc_offset([event])
    return record("AC2", offset == -28800, f"offset {offset} s")


def check_ac3():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    n, bad = 1500, 0
    for _ in range(n):
        theta = float(rng.uniform(0.05, 3.0))
        ts = random_stream(rng, theta)
        got = [(s.start_epoch, s.end_epoch, s.event_count) for s in sessionize(ts, theta)]
        bad += got != gap_scan(ts, theta)
    elapsed = time.perf_counter() - t0
    return record("AC3", bad == 0 and elapsed < 5.0,
                  f"{n - bad}/{n} streams match the oracle in {elapsed:.2f} s")


def check_ac4():
    rng = np.random.default_rng(4)
    trials, bad = 10_000, 0
    t0 = time.perf_counter()
    for _ in range(trials):
        a, b = sorted(rng.uniform(0.05, 3.0, size=2))
        ts = random_stream(rng, b, max_len=60)
        lo, hi = sessionize(ts, a), sessionize(ts, b)
        # insertion anywhere from before the first event to past the last one
        t_new = int(rng.integers(900_000, 1_000_000 + 61 * 10 * int(b * 3600)))
        extra = sessionize(ts + [t_new], a)
        bad += time_on_task(lo) > time_on_task(hi)
        bad += len(lo) < len(hi)
        bad += time_on_task(extra) < time_on_task(lo)
    elapsed = time.perf_counter() - t0
    return record("AC4", bad == 0,
                  f"{bad} counterexamples in {trials} trials ({elapsed:.1f} s)")


def check_ac5():
    course = generate_course(GeneratorParams(seed=5, n_students=40, n_assignments=4))
    lines_ok = all(format_answer_line(parse_answer_line(x)) == x for x in course.answer_lines)
    lines_ok &= all(format_login_line(parse_login_line(x)) == x for x in course.login_lines)
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_logs(course, tmp)
        logs = load_logs(paths[ANSWER_LOG], paths[LOGIN_LOG])
    result = analyze(logs, course.params.theta_true)
    mismatched = 0
    checked = 0
    for user, t in course.truth.users.items():
        for set_id, expected in t.sessions.items():
            got = [(s.start_epoch, s.end_epoch, s.event_count)
                   for s in result.sessions.get((user, set_id), [])]
            mismatched += got != expected
            mismatched += time_on_task(result.sessions.get((user, set_id), [])) \
                != t.assignment_hours(set_id)
            checked += 1
        mismatched += result.course_hours.get(user) != t.course_hours
    ok = lines_ok and mismatched == 0 and checked > 0
    n_lines = len(course.answer_lines) + len(course.login_lines)
    return record("AC5", ok, f"{n_lines} lines round-trip={lines_ok}; "
                  f"{checked} user-assignment session lists, {mismatched} mismatches")


def check_ac6():
    t0 = time.perf_counter()
    course = generate_course(CALIBRATION_PARAMS)
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_logs(course, tmp)
        logs = load_logs(paths[ANSWER_LOG], paths[LOGIN_LOG])
        tables = load_tables_dir(tmp, require_lms=True, local_offset_seconds=logs.offset_seconds)
    result = calibrate(user_timelines(logs.answers, logs.logins), tables.lms_hours)
    elapsed = time.perf_counter() - t0
    planted = {u for u, t in course.truth.users.items() if t.direct_access}
    fit = result.fit_at_star
    removed_ok = set(result.removed) == planted
    slope_ok = 0.94 <= fit.slope <= 1.06
    r_ok = fit.pearson_r >= 0.77
    ok = removed_ok and slope_ok and r_ok and elapsed < 30
    return record("AC6", ok, f"removed {len(result.removed)} (planted {len(planted)}, "
                  f"exact={removed_ok}); theta*={result.theta_star:g} h slope {fit.slope:.4f} "
                  f"r {fit.pearson_r:.3f} n {fit.n_used}; {elapsed:.1f} s")


def check_ac7():
    s = PairedSample.from_points([(1, 2), (2, 3), (3, 5)])
    fit = ols_fit(s)
    r = pearson(s)
    errs = [abs(fit.slope - 1.5), abs(fit.intercept - 1 / 3),
            abs(r - 3 / math.sqrt(28 / 3)), abs(fit.pearson_r - r)]
    ok = max(errs) <= 1e-9 and round(r, 3) == 0.982
    return record("AC7", ok, f"slope {fit.slope:.12g} intercept {fit.intercept:.12g} "
                  f"r {r:.6f}; max error {max(errs):.1e}")


EXPECTED_SIGNS = {
    "total_hours": -1,
    "mean_session_hours": -1,
    "first_submission_days_before_deadline": -1,
    "persistence_hours": -1,
    "persistence_attempts": -1,
    "problems_per_hour": +1,
}


def check_ac8():
    course = generate_course(CALIBRATION_PARAMS)
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_logs(course, tmp)
        logs = load_logs(paths[ANSWER_LOG], paths[LOGIN_LOG])
        tables = load_tables_dir(tmp, local_offset_seconds=logs.offset_seconds)
    result = analyze(logs, course.params.theta_true, tables)
    split = split_groups(result.aggregates)
    rows = compare_table(split, result.aggregates, list(EXPECTED_SIGNS))
    wrong = [r.metric for r in rows
             if r.cohens_d is None or np.sign(r.cohens_d) != EXPECTED_SIGNS[r.metric]]
    shown = ", ".join(f"{r.metric} {r.cohens_d:+.2f}" for r in rows if r.cohens_d is not None)
    return record("AC8", not wrong, f"low {len(split.low)} / high {len(split.high)}; {shown}"
                  + (f"; wrong sign: {wrong}" if wrong else ""))


def test_ac1_effect_size_recomputation():
    assert check_ac1(), RESULTS["AC1"][1]


def test_ac2_offset_from_first_line():
    assert check_ac2(), RESULTS["AC2"][1]


def test_ac3_sessionizer_matches_oracle():
    assert check_ac3(), RESULTS["AC3"][1]


def test_ac4_monotonicity():
    assert check_ac4(), RESULTS["AC4"][1]


def test_ac5_round_trip_and_recovery():
    assert check_ac5(), RESULTS["AC5"][1]


def test_ac6_calibration_on_synthetic_course():
    assert check_ac6(), RESULTS["AC6"][1]


def test_ac7_statistics_hand_values():
    assert check_ac7(), RESULTS["AC7"][1]


def test_ac8_planted_signs():
    assert check_ac8(), RESULTS["AC8"][1]


if __name__ == "__main__":
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
    checks = [check_ac1, check_ac2, check_ac3, check_ac4, check_ac5, check_ac6, check_ac7,
              check_ac8]
    for check in checks:
        check()
    for key in sorted(RESULTS, key=lambda k: int(k[2:])):
        ok, detail = RESULTS[key]
        print(f"{'PASS' if ok else 'FAIL'} {key}: {detail}")
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
