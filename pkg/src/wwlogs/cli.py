"""Command-line entry point.

Exit codes: 0 success, 1 empty or degenerate analysis, 2 bad input or
configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import cohort, export
from .calibration import DEFAULT_GRID, DEFAULT_RATIO, calibrate, make_grid
from .errors import EmptyInput, InvalidParams, MissingFile, NoValidRows, UnknownMetricName
from .ingest import load_tables_dir
from .pipeline import analyze, load_logs
from .sessions import DEFAULT_THETA_HOURS, user_timelines
from .synth import TRUTH_FILE, GeneratorParams, generate_course, write_logs

DEFAULT_METRICS = (
    "points_per_hour",
    "problems_per_hour",
    "mean_difficulty_attempted",
    "persistence_hours",
    "persistence_attempts",
    "total_hours",
    "mean_session_hours",
    "session_count",
    "first_last_submission_days",
    "mean_between_session_hours",
    "first_submission_days_before_deadline",
)

EXIT_OK, EXIT_EMPTY, EXIT_USAGE = 0, 1, 2


class Degenerate(Exception):
    """Analysis ran but had nothing meaningful to report."""


def _theta(text: str):
    if text == "calibrate":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--theta must be a number or 'calibrate', got {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"--theta must be > 0, got {text}")
    return value


def _grid(text: str):
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--grid must look like lo:hi:step, got {text!r}")
    if not (0 < lo <= hi and step > 0):
        raise argparse.ArgumentTypeError("--grid needs 0 < lo <= hi and step > 0")
    return lo, hi, step


def _ratio(text: str) -> float:
    value = float(text)
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError("--ratio must be in (0, 1]")
    return value


def _cut(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("--cut must be in (0, 1)")
    return value


def _metric_list(text: str):
    return tuple(m.strip() for m in text.split(",") if m.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wwlogs", description="Mine WeBWorK answer and login logs for homework metrics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def analysis_args(p, theta=True):
        p.add_argument("--answer-log", required=True, type=Path)
        p.add_argument("--login-log", type=Path)
        p.add_argument("--tables", type=Path, help="directory holding lms_times.csv etc.")
        p.add_argument("--out", type=Path, default=Path("wwlogs_out"))
        if theta:
            p.add_argument("--theta", type=_theta, default=DEFAULT_THETA_HOURS,
                           help="inactivity threshold in hours, or 'calibrate'")
        p.add_argument("--grid", type=_grid, default=DEFAULT_GRID,
                       help="calibration grid lo:hi:step in hours (default 0.1:2:0.05)")
        p.add_argument("--ratio", type=_ratio, default=DEFAULT_RATIO,
                       help="drop students with LMS hours below ratio * WeBWorK hours")

    p = sub.add_parser("sessions", help="write session tables")
    analysis_args(p)
    p.set_defaults(func=cmd_sessions)

    p = sub.add_parser("calibrate", help="choose the inactivity threshold against LMS time")
    analysis_args(p, theta=False)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("metrics", help="write per-assignment and per-student metrics")
    analysis_args(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("compare", help="compare low- and high-scoring students")
    analysis_args(p)
    p.add_argument("--cut", type=_cut, default=cohort.DEFAULT_CUT)
    p.add_argument("--metrics", type=_metric_list, default=DEFAULT_METRICS,
                   help="comma-separated metric names")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("generate", help="write a synthetic course with ground truth")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--params", type=Path, help="JSON file of generator parameters")
    p.add_argument("--n-students", type=int)
    p.set_defaults(func=cmd_generate)
    return parser


def _config(args) -> dict:
    out = {}
    for key, value in sorted(vars(args).items()):
        if key == "func":
            continue
        if isinstance(value, Path):
            value = str(value)
        elif isinstance(value, tuple):
            value = list(value)
        out[key] = value
    return out


def _prov(args) -> dict:
    inputs = {"answer_log": args.answer_log, "login_log": args.login_log}
    if args.tables is not None:
        for name in ("lms_times.csv", "roster.csv", "deadlines.csv", "weights.csv"):
            inputs[name] = args.tables / name
    return export.provenance(inputs, _config(args))


def _load(args):
    if not args.answer_log.is_file():
        raise MissingFile(f"answer log not found: {args.answer_log}")
    if args.login_log is not None and not args.login_log.is_file():
        raise MissingFile(f"login log not found: {args.login_log}")
    logs = load_logs(args.answer_log, args.login_log)
    ar, lr = logs.answer_report, logs.login_report
    print(f"answer lines: {ar.lines_read} read, {len(ar.events)} events, {ar.rejected} rejected")
    print(f"login lines: {lr.lines_read} read, {len(lr.events)} events, "
          f"{lr.skipped} skipped, {lr.rejected} rejected")
    for lineno, reason in ar.samples[:5] + lr.samples[:5]:
        print(f"  rejected line {lineno}: {reason}", file=sys.stderr)
    print(f"users: {len(logs.users)}  server offset: {logs.offset_seconds} s")
    return logs


def _tables(args, logs, require_lms=False):
    if args.tables is None:
        if require_lms:
            raise MissingFile("--tables with lms_times.csv is required")
        return None
    return load_tables_dir(args.tables, require_lms=require_lms,
                           local_offset_seconds=logs.offset_seconds)


def _run_calibration(args, logs, tables):
    result = calibrate(user_timelines(logs.answers, logs.logins), tables.lms_hours,
                       make_grid(*args.grid), args.ratio)
    fit = result.fit_at_star
    lo, hi = fit.slope_ci95
    print(f"theta_star: {result.theta_star:g} h  slope: {fit.slope:.4f} "
          f"(95% CI [{lo:.4f}, {hi:.4f}])  r: {fit.pearson_r:.3f}  n: {fit.n_used}")
    return result


def _resolve_theta(args, logs, tables):
    if args.theta != "calibrate":
        return args.theta
    if tables is None or not tables.lms_hours:
        raise MissingFile("--theta calibrate needs --tables with lms_times.csv")
    return _run_calibration(args, logs, tables).theta_star


def cmd_sessions(args) -> int:
    logs = _load(args)
    tables = _tables(args, logs, require_lms=args.theta == "calibrate")
    theta = _resolve_theta(args, logs, tables)
    result = analyze(logs, theta, tables)
    args.out.mkdir(parents=True, exist_ok=True)
    export.write_sessions(args.out / "sessions.csv", result.sessions)
    export.write_json(args.out / "sessions_provenance.json", _prov(args))
    n = sum(len(v) for (u, s), v in result.sessions.items() if s is not None)
    print(f"theta: {theta:g} h  assignment sessions: {n}  -> {args.out / 'sessions.csv'}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    logs = _load(args)
    tables = _tables(args, logs, require_lms=True)
    result = _run_calibration(args, logs, tables)
    args.out.mkdir(parents=True, exist_ok=True)
    export.write_csv(args.out / "calibration_sweep.csv", export.SWEEP_COLUMNS,
                     export.sweep_rows(result.sweep))
    export.write_json(args.out / "calibration.json",
                      export.calibration_payload(result, _prov(args)))
    print(f"theta_star={result.theta_star:g}")
    return EXIT_OK


def _metrics(args):
    logs = _load(args)
    tables = _tables(args, logs, require_lms=args.theta == "calibrate")
    theta = _resolve_theta(args, logs, tables)
    result = analyze(logs, theta, tables)
    args.out.mkdir(parents=True, exist_ok=True)
    export.write_assignment_metrics(args.out / "assignment_metrics.csv", result.per_assignment)
    export.write_student_metrics(args.out / "student_metrics.csv", result.aggregates)
    export.write_assignment_summary(args.out / "assignment_summary.csv", result.summaries)
    export.write_difficulty(args.out / "difficulty.csv", result.difficulty)
    return result


def cmd_metrics(args) -> int:
    result = _metrics(args)
    export.write_json(args.out / "metrics_provenance.json",
                      {**_prov(args), "theta": result.theta})
    print(f"students: {len(result.aggregates)}  -> {args.out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    result = _metrics(args)
    split = cohort.split_groups(result.aggregates, args.cut)
    print(f"low group (< {args.cut:g}): {len(split.low)}  high group: {len(split.high)}")
    if not split.low or not split.high:
        raise Degenerate("one of the groups is empty")
    rows = cohort.compare_table(split, result.aggregates, args.metrics)
    prov = {**_prov(args), "theta": result.theta}
    export.write_csv(args.out / "comparison.csv", export.COMPARISON_COLUMNS,
                     export.comparison_rows(rows))
    export.write_json(args.out / "comparison.json", export.comparison_payload(split, rows, prov))
    hists = {m: cohort.group_histograms(split, result.aggregates, m) for m in args.metrics}
    export.write_histograms(args.out / "histograms.csv", hists)
    export.write_boxplots(args.out / "boxplots.csv", rows)
    width = max(len(r.metric) for r in rows)
    print(f"{'metric':<{width}}  {'low':>14}  {'high':>14}  d")
    for r in rows:
        d = "" if r.cohens_d is None else f"{r.cohens_d:+.2f}"
        print(f"{r.metric:<{width}}  {r.cell('low'):>14}  {r.cell('high'):>14}  {d}")
    return EXIT_OK


def cmd_generate(args) -> int:
    data = {}
    if args.params is not None:
        if not args.params.is_file():
            raise MissingFile(f"params file not found: {args.params}")
        try:
            data = json.loads(args.params.read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise InvalidParams(f"params file is not JSON: {err}") from None
        if not isinstance(data, dict):
            raise InvalidParams("params JSON must be an object")
    if args.seed is not None:
        data["seed"] = args.seed
    if args.n_students is not None:
        data["n_students"] = args.n_students
    params = GeneratorParams.from_dict(data)
    paths = write_logs(generate_course(params), args.out)
    print(paths[TRUTH_FILE])
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (MissingFile, InvalidParams, UnknownMetricName, OSError) as err:
        print(f"wwlogs: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (EmptyInput, NoValidRows, Degenerate) as err:
        print(f"wwlogs: {err}", file=sys.stderr)
        return EXIT_EMPTY


if __name__ == "__main__":
    sys.exit(main())
