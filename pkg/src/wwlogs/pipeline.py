"""End-to-end wiring: logs -> sessions -> metrics -> aggregates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .ingest import (
    CourseTables,
    IngestReport,
    infer_utc_offset,
    read_answer_log,
    read_login_log,
    reconcile_logins,
)
from .metrics import (
    assignment_metrics,
    assignment_summaries,
    difficulty_ratings,
    possible_points,
    problem_outcomes,
    question_counts,
    student_aggregates,
)
from .sessions import (
    WHOLE_COURSE,
    sessionize,
    stream_sessions,
    time_on_task,
    user_assignment_streams,
    user_timelines,
)


@dataclass
class CourseLogs:
    answers: list
    logins: list
    offset_seconds: int
    answer_report: Optional[IngestReport] = None
    login_report: Optional[IngestReport] = None

    @property
    def users(self) -> list:
        return sorted({e.user_id for e in self.answers} |
                      {e.user_id for e in self.logins if e.success})


def load_logs(answer_log, login_log=None) -> CourseLogs:
    """Read both logs and put logins on the epoch axis.

    Raises :class:`~wwlogs.errors.EmptyInput` if the answer log holds no
    parseable events, since the server offset cannot be recovered then.
    """
    answers = read_answer_log(answer_log)
    logins = read_login_log(login_log) if login_log is not None else IngestReport(events=[])
    offset = infer_utc_offset(answers.events)
    return CourseLogs(answers.events, reconcile_logins(logins.events, offset),
                      offset, answers, logins)


@dataclass
class Analysis:
    theta: float
    sessions: dict
    course_hours: dict
    outcomes: list
    difficulty: dict
    per_assignment: list
    aggregates: list
    summaries: list
    possible: dict = field(default_factory=dict)


def analyze(logs: CourseLogs, theta: float, tables: Optional[CourseTables] = None) -> Analysis:
    """Every metric at one inactivity threshold.

    ``sessions`` maps ``(user_id, set_id)`` to that assignment's sessions
    and ``(user_id, WHOLE_COURSE)`` to the whole-course sessions.
    """
    tables = tables or CourseTables()
    sessions = {}
    for key, stream in user_assignment_streams(logs.answers, logs.logins).items():
        sessions[key] = stream_sessions(stream, theta)
    course_hours = {}
    for user, ts in user_timelines(logs.answers, logs.logins).items():
        whole = sessionize(ts, theta)
        sessions[(user, WHOLE_COURSE)] = whole
        course_hours[user] = time_on_task(whole)

    outcomes = problem_outcomes(logs.answers)
    roster = list(tables.attributes) or None
    difficulty = difficulty_ratings(outcomes, roster)
    possible = possible_points(outcomes, tables.weights)
    course_possible = sum(possible.values())

    by_user = {}
    for o in outcomes:
        by_user.setdefault(o.user_id, []).append(o)

    per_assignment = []
    for (user, set_id), sess in sessions.items():
        if set_id is WHOLE_COURSE:
            continue
        per_assignment.append(assignment_metrics(
            user, set_id, by_user.get(user, []), sess, tables.deadlines,
            tables.weights, possible.get(set_id)))
    per_assignment.sort(key=lambda m: (m.user_id, m.set_id))

    rows_by_user = {}
    for m in per_assignment:
        rows_by_user.setdefault(m.user_id, []).append(m)
    users = sorted(set(by_user) | set(tables.attributes))
    aggregates = []
    for user in users:
        entry = tables.attributes.get(user)
        aggregates.append(student_aggregates(
            user, rows_by_user.get(user, []), by_user.get(user, []), difficulty,
            course_possible=course_possible, course_hours=course_hours.get(user, 0.0),
            official_score=entry.official_score if entry else None))

    summaries = assignment_summaries(per_assignment, question_counts(outcomes, tables.weights))
    return Analysis(theta, sessions, course_hours, outcomes, difficulty,
                    per_assignment, aggregates, summaries, possible)
