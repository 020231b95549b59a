"""Per-problem, per-assignment and per-student behaviour metrics.

Metrics that cannot be computed (no deadline, fewer than two sessions,
zero hours, no incomplete problems) are ``None``; they are never filled in
with zeros.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from .sessions import time_on_task

DAY = 86400.0
HOUR = 3600.0


@dataclass(frozen=True)
class ProblemOutcome:
    user_id: str
    set_id: str
    problem_number: int
    attempts: int
    first_epoch: int
    last_epoch: int
    best_fraction: float
    completed: bool

    @property
    def key(self):
        return (self.set_id, self.problem_number)


@dataclass(frozen=True)
class StudentAssignmentMetrics:
    user_id: str
    set_id: str
    total_hours: float
    session_count: int
    mean_session_hours: Optional[float]
    first_last_submission_days: Optional[float]
    mean_between_session_hours: Optional[float]
    first_submission_days_before_deadline: Optional[float]
    points_earned: float
    points_possible: float
    problems_attempted: int
    problems_completed: int
    attempts: int


# per-assignment fields averaged into the student aggregate
ASSIGNMENT_FIELDS = (
    "total_hours",
    "session_count",
    "mean_session_hours",
    "first_last_submission_days",
    "mean_between_session_hours",
    "first_submission_days_before_deadline",
    "points_earned",
    "problems_attempted",
    "attempts",
)


@dataclass(frozen=True)
class StudentAggregate:
    user_id: str
    ww_score_fraction: Optional[float]
    course_hours: float
    points_per_hour: Optional[float]
    problems_per_hour: Optional[float]
    mean_difficulty_attempted: Optional[float]
    persistence_hours: Optional[float]
    persistence_attempts: Optional[float]
    assignments_active: int
    total_hours: Optional[float]
    session_count: Optional[float]
    mean_session_hours: Optional[float]
    first_last_submission_days: Optional[float]
    mean_between_session_hours: Optional[float]
    first_submission_days_before_deadline: Optional[float]
    points_earned: Optional[float]
    problems_attempted: Optional[float]
    attempts: Optional[float]


def metric_names() -> list:
    """Numeric columns of :class:`StudentAggregate` usable in comparisons."""
    return [f.name for f in fields(StudentAggregate) if f.name != "user_id"]


def problem_outcomes(answer_events) -> list:
    """Roll submissions up per (user, set, problem), sorted by that key."""
    groups = defaultdict(list)
    for ev in answer_events:
        groups[(ev.user_id, ev.set_id, ev.problem_number)].append(ev)
    out = []
    for (user, set_id, problem), evs in sorted(groups.items()):
        epochs = [e.epoch_seconds for e in evs]
        out.append(ProblemOutcome(
            user_id=user,
            set_id=set_id,
            problem_number=problem,
            attempts=len(evs),
            first_epoch=min(epochs),
            last_epoch=max(epochs),
            best_fraction=max(e.fraction_correct for e in evs),
            completed=any(e.fully_correct for e in evs),
        ))
    return out


def difficulty_ratings(outcomes, roster=None) -> dict:
    """Percent of a problem's attempters who never got it fully right.

    If ``roster`` (an iterable of user ids) is given, only those students
    count. Problems nobody attempted are absent from the result.
    """
    members = set(roster) if roster is not None else None
    tried = defaultdict(int)
    failed = defaultdict(int)
    for o in outcomes:
        if members is not None and o.user_id not in members:
            continue
        tried[o.key] += 1
        if not o.completed:
            failed[o.key] += 1
    return {k: 100.0 * failed[k] / n for k, n in sorted(tried.items())}


def question_counts(outcomes, weights=None) -> dict:
    """Number of questions per set: from the weights table where it lists
    the set, else the distinct problems anyone attempted."""
    seen = defaultdict(set)
    for o in outcomes:
        seen[o.set_id].add(o.problem_number)
    listed = defaultdict(set)
    for set_id, problem in weights or {}:
        listed[set_id].add(problem)
    return {s: len(listed[s] or seen[s]) for s in sorted(set(seen) | set(listed))}


def possible_points(outcomes, weights=None) -> dict:
    """Total available points per set, default weight 1 per question."""
    problems = defaultdict(set)
    for o in outcomes:
        problems[o.set_id].add(o.problem_number)
    listed = defaultdict(float)
    for (set_id, _), w in (weights or {}).items():
        listed[set_id] += w
    return {
        s: float(listed[s]) if s in listed else float(len(problems[s]))
        for s in sorted(set(problems) | set(listed))
    }


def assignment_metrics(user_id, set_id, outcomes, sessions, deadlines=None,
                       weights=None, points_possible: Optional[float] = None
                       ) -> StudentAssignmentMetrics:
    """Metrics for one student on one assignment.

    ``outcomes`` may contain other users or sets; only matching ones are
    used. ``sessions`` are that student's sessions for this assignment.
    """
    mine = [o for o in outcomes if o.user_id == user_id and o.set_id == set_id]
    weights = weights or {}
    sessions = sorted(sessions, key=lambda s: s.start_epoch)

    total = time_on_task(sessions)
    n_sess = len(sessions)
    mean_len = total / n_sess if n_sess else None
    between = None
    if n_sess >= 2:
        gaps = [b.start_epoch - a.end_epoch for a, b in zip(sessions, sessions[1:])]
        between = sum(gaps) / len(gaps) / HOUR

    first_last = before_deadline = None
    if mine:
        first = min(o.first_epoch for o in mine)
        last = max(o.last_epoch for o in mine)
        first_last = (last - first) / DAY
        deadline = (deadlines or {}).get(set_id)
        if deadline is not None:
            before_deadline = (deadline - first) / DAY

    earned = sum(weights.get(o.key, 1.0) * o.best_fraction for o in mine)
    if points_possible is None:
        points_possible = sum(weights.get(o.key, 1.0) for o in mine)
    return StudentAssignmentMetrics(
        user_id=user_id,
        set_id=set_id,
        total_hours=total,
        session_count=n_sess,
        mean_session_hours=mean_len,
        first_last_submission_days=first_last,
        mean_between_session_hours=between,
        first_submission_days_before_deadline=before_deadline,
        points_earned=float(earned),
        points_possible=float(points_possible),
        problems_attempted=len(mine),
        problems_completed=sum(o.completed for o in mine),
        attempts=sum(o.attempts for o in mine),
    )


def _mean(values) -> Optional[float]:
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else None


def student_aggregates(user_id, per_assignment, outcomes, difficulty,
                       course_possible: Optional[float] = None,
                       course_hours: float = 0.0,
                       official_score: Optional[float] = None) -> StudentAggregate:
    """Roll one student's assignment metrics up to course level.

    The score is total points over total available points in the course
    (``course_possible``; defaults to the points possible on the student's
    own assignments). Rates divide totals by total hours. Persistence is
    averaged over the student's incomplete problems, single attempts
    included.
    """
    rows = [m for m in per_assignment if m.user_id == user_id]
    mine = [o for o in outcomes if o.user_id == user_id]

    points = sum(m.points_earned for m in rows)
    hours = sum(m.total_hours for m in rows)
    possible = course_possible if course_possible is not None else sum(
        m.points_possible for m in rows)
    if official_score is not None:
        score = official_score
    else:
        score = points / possible if possible > 0 else None

    attempted = {o.key for o in mine}
    per_hour = points / hours if hours > 0 else None
    probs_per_hour = len(attempted) / hours if hours > 0 else None
    diffs = [difficulty[k] for k in sorted(attempted) if k in difficulty]

    incomplete = [o for o in mine if not o.completed]
    persist_h = _mean((o.last_epoch - o.first_epoch) / HOUR for o in incomplete)
    persist_n = _mean(o.attempts for o in incomplete)

    # averages over the assignments where the student has at least one session
    active = [m for m in rows if m.session_count > 0]
    means = {f: _mean(getattr(m, f) for m in active) for f in ASSIGNMENT_FIELDS}
    return StudentAggregate(
        user_id=user_id,
        ww_score_fraction=score,
        course_hours=float(course_hours),
        points_per_hour=per_hour,
        problems_per_hour=probs_per_hour,
        mean_difficulty_attempted=_mean(diffs),
        persistence_hours=persist_h,
        persistence_attempts=persist_n,
        assignments_active=len(active),
        **means,
    )


@dataclass(frozen=True)
class AssignmentSummary:
    set_id: str
    mean_total_hours: float
    question_count: int
    students: int


def assignment_summaries(class_metrics, question_count: dict) -> list:
    """Class mean time per set, paired with the set's question count."""
    hours = defaultdict(list)
    for m in class_metrics:
        hours[m.set_id].append(m.total_hours)
    return [
        AssignmentSummary(s, float(np.mean(h)), int(question_count.get(s, 0)), len(h))
        for s, h in sorted(hours.items())
    ]


def as_row(record) -> dict:
    return asdict(record)
