"""Delimited and JSON report writers.

Undefined metrics are written as empty CSV fields and JSON ``null``.
Column order is fixed so repeated runs produce identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, fields
from pathlib import Path

from .metrics import StudentAggregate, StudentAssignmentMetrics
from .sessions import WHOLE_COURSE

COURSE_SCOPE = "__course__"

SESSION_COLUMNS = ("user_id", "scope", "start_epoch", "end_epoch", "events", "length_hours")
SWEEP_COLUMNS = ("theta", "slope", "slope_ci_lo", "slope_ci_hi", "pearson_r",
                 "mean_total_hours", "n_retained")
ASSIGNMENT_COLUMNS = tuple(f.name for f in fields(StudentAssignmentMetrics))
STUDENT_COLUMNS = tuple(f.name for f in fields(StudentAggregate))
COMPARISON_COLUMNS = ("metric", "n_low", "mean_low", "sd_low", "median_low", "q1_low", "q3_low",
                      "n_high", "mean_high", "sd_high", "median_high", "q1_high", "q3_high",
                      "cell_low", "cell_high", "cohens_d")


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(round(value, 10))
    return value


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(row.get(c)) for c in columns])
    return path


def write_json(path, payload) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, allow_nan=False)
        fh.write("\n")
    return path


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def provenance(inputs: dict, config: dict) -> dict:
    """Input digests plus a config echo, attached to every report."""
    return {
        "inputs": {
            name: {"path": str(p), "sha256": file_digest(p)}
            for name, p in sorted(inputs.items()) if p is not None and Path(p).is_file()
        },
        "config": config,
    }


def session_rows(sessions: dict):
    for (user, scope), items in sorted(
            sessions.items(), key=lambda kv: (kv[0][0], kv[0][1] is not WHOLE_COURSE,
                                              kv[0][1] or "")):
        for s in items:
            yield {
                "user_id": user,
                "scope": COURSE_SCOPE if scope is WHOLE_COURSE else scope,
                "start_epoch": s.start_epoch,
                "end_epoch": s.end_epoch,
                "events": s.event_count,
                "length_hours": s.length_hours,
            }


def write_sessions(path, sessions: dict) -> Path:
    return write_csv(path, SESSION_COLUMNS, session_rows(sessions))


def sweep_rows(sweep):
    for r in sweep:
        yield {
            "theta": r.theta,
            "slope": r.slope,
            "slope_ci_lo": r.fit.slope_ci95[0] if r.fit else None,
            "slope_ci_hi": r.fit.slope_ci95[1] if r.fit else None,
            "pearson_r": r.fit.pearson_r if r.fit else None,
            "mean_total_hours": r.mean_total_hours,
            "n_retained": r.n_retained,
        }


def calibration_payload(result, prov: dict) -> dict:
    return {
        "provenance": prov,
        "theta_star": result.theta_star,
        "fit_at_star": result.fit_at_star.as_dict() if result.fit_at_star else None,
        "removed_as_outliers": list(result.removed),
        "sweep": [
            {**row, "fit": r.fit.as_dict() if r.fit else None}
            for row, r in zip(sweep_rows(result.sweep), result.sweep)
        ],
    }


def write_assignment_metrics(path, rows) -> Path:
    return write_csv(path, ASSIGNMENT_COLUMNS, (asdict(m) for m in rows))


def write_student_metrics(path, rows) -> Path:
    return write_csv(path, STUDENT_COLUMNS, (asdict(a) for a in rows))


def write_assignment_summary(path, summaries) -> Path:
    return write_csv(path, ("set_id", "mean_total_hours", "question_count", "students"),
                     (asdict(s) for s in summaries))


def write_difficulty(path, difficulty: dict) -> Path:
    return write_csv(path, ("set_id", "problem", "difficulty"), (
        {"set_id": s, "problem": p, "difficulty": d} for (s, p), d in difficulty.items()))


def comparison_rows(comparisons):
    for c in comparisons:
        row = {"metric": c.metric, "cell_low": c.cell("low"), "cell_high": c.cell("high"),
               "cohens_d": c.cohens_d}
        for tag, desc in (("low", c.low), ("high", c.high)):
            row[f"n_{tag}"] = desc.n if desc else 0
            for stat in ("mean", "sd", "median", "q1", "q3"):
                row[f"{stat}_{tag}"] = getattr(desc, stat) if desc else None
        yield row


def comparison_payload(split, comparisons, prov: dict) -> dict:
    return {
        "provenance": prov,
        "cut": split.cut,
        "groups": {"low": {"n": len(split.low)}, "high": {"n": len(split.high)}},
        "rows": [
            {
                "metric": c.metric,
                "low": asdict(c.low) if c.low else None,
                "high": asdict(c.high) if c.high else None,
                "low_cell": c.cell("low"),
                "high_cell": c.cell("high"),
                "cohens_d": c.cohens_d,
            }
            for c in comparisons
        ],
    }


def write_histograms(path, hists: dict) -> Path:
    """Long-format histogram table: one row per (metric, group, bin)."""
    rows = []
    for metric, groups in hists.items():
        for group, h in groups.items():
            for i, count in enumerate(h.counts):
                rows.append({"metric": metric, "group": group, "bin_lo": h.edges[i],
                             "bin_hi": h.edges[i + 1], "count": count,
                             "underflow": h.underflow, "overflow": h.overflow})
    return write_csv(path, ("metric", "group", "bin_lo", "bin_hi", "count",
                            "underflow", "overflow"), rows)


def write_boxplots(path, comparisons) -> Path:
    rows = []
    for c in comparisons:
        for group, desc in (("low", c.low), ("high", c.high)):
            if desc is None:
                continue
            rows.append({"metric": c.metric, "group": group, "n": desc.n, "q1": desc.q1,
                         "median": desc.median, "q3": desc.q3, "mean": desc.mean})
    return write_csv(path, ("metric", "group", "n", "q1", "median", "q3", "mean"), rows)
