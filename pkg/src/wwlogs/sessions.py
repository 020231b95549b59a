"""Activity sessions and time-on-task.

A session is a maximal run of a student's events in which no two
consecutive events are more than the inactivity threshold apart. A gap
exactly equal to the threshold does not split. Time on task is the sum of
session lengths, so isolated events contribute nothing.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import NonPositiveThreshold

DEFAULT_THETA_HOURS = 0.95
WHOLE_COURSE = None


@dataclass(frozen=True, slots=True)
class ActivitySession:
    start_epoch: int
    end_epoch: int
    event_count: int

    @property
    def length_hours(self) -> float:
        return (self.end_epoch - self.start_epoch) / 3600.0


@dataclass(frozen=True)
class EventStream:
    """Activity timestamps of one user for one assignment or the whole course.

    ``submissions`` holds the in-scope answer times only; logins appear in
    ``timestamps`` but not there.
    """

    user_id: str
    scope: Optional[str]
    timestamps: tuple
    submissions: tuple = ()


def threshold_seconds(theta_hours: float) -> float:
    if not theta_hours > 0:
        raise NonPositiveThreshold(f"inactivity threshold must be > 0, got {theta_hours}")
    # guards against 0.95 * 3600 landing a hair under 3420
    return round(theta_hours * 3600.0, 6)


def build_event_stream(answer_events, login_events, user_id: str,
                       scope: Optional[str] = WHOLE_COURSE) -> EventStream:
    """Collect a user's activity events.

    For an assignment scope this is that assignment's submissions plus every
    successful login of the user, since logins are not tied to an
    assignment. ``login_events`` must already carry epoch seconds (see
    :func:`wwlogs.ingest.reconcile_logins`).
    """
    subs = sorted(
        ev.epoch_seconds for ev in answer_events
        if ev.user_id == user_id and (scope is WHOLE_COURSE or ev.set_id == scope)
    )
    logins = []
    for ev in login_events:
        if ev.user_id != user_id or not ev.success:
            continue
        if ev.epoch_seconds is None:
            raise ValueError("login events must be reconciled to epoch seconds first")
        logins.append(ev.epoch_seconds)
    return EventStream(user_id, scope, tuple(sorted(subs + logins)), tuple(subs))


def sessionize(stream, theta_hours: float = DEFAULT_THETA_HOURS) -> list:
    """Split a stream (or bare sequence of epoch seconds) into sessions."""
    limit = threshold_seconds(theta_hours)
    ts = stream.timestamps if isinstance(stream, EventStream) else stream
    t = np.sort(np.asarray(ts, dtype=np.int64))
    if t.size == 0:
        return []
    cuts = np.flatnonzero(np.diff(t) > limit) + 1
    first = np.concatenate(([0], cuts))
    last = np.concatenate((cuts, [t.size])) - 1
    return [
        ActivitySession(int(t[a]), int(t[b]), int(b - a + 1))
        for a, b in zip(first, last)
    ]


def associated_sessions(sessions: Sequence[ActivitySession], submissions) -> list:
    """Sessions that contain at least one of the given submission times.

    A session made only of logins belongs to no assignment; it is dropped
    from assignment-scoped results.
    """
    subs = np.sort(np.asarray(submissions, dtype=np.int64))
    if subs.size == 0:
        return []
    keep = []
    for s in sessions:
        lo = np.searchsorted(subs, s.start_epoch, side="left")
        hi = np.searchsorted(subs, s.end_epoch, side="right")
        if hi > lo:
            keep.append(s)
    return keep


def stream_sessions(stream: EventStream, theta_hours: float = DEFAULT_THETA_HOURS) -> list:
    """Sessions of a stream as reported downstream.

    Whole-course streams are returned as sessionized; assignment streams
    keep only sessions holding a submission to that assignment.
    """
    sessions = sessionize(stream, theta_hours)
    if stream.scope is WHOLE_COURSE:
        return sessions
    return associated_sessions(sessions, stream.submissions)


def time_on_task(sessions: Iterable[ActivitySession]) -> float:
    return float(sum(s.end_epoch - s.start_epoch for s in sessions)) / 3600.0


def course_total_time(answer_events, login_events, user_id: str,
                      theta_hours: float = DEFAULT_THETA_HOURS) -> float:
    """Hours on the merged whole-course stream.

    Interleaved work on several assignments is counted once, so this can be
    smaller than the sum of per-assignment totals.
    """
    threshold_seconds(theta_hours)
    stream = build_event_stream(answer_events, login_events, user_id, WHOLE_COURSE)
    return time_on_task(sessionize(stream, theta_hours))


def user_timelines(answer_events, login_events) -> dict:
    """Sorted whole-course epoch arrays keyed by user, in one pass."""
    acc = defaultdict(list)
    for ev in answer_events:
        acc[ev.user_id].append(ev.epoch_seconds)
    for ev in login_events:
        if ev.success:
            if ev.epoch_seconds is None:
                raise ValueError("login events must be reconciled to epoch seconds first")
            acc[ev.user_id].append(ev.epoch_seconds)
    return {u: np.sort(np.asarray(ts, dtype=np.int64)) for u, ts in sorted(acc.items())}


def total_hours_array(timestamps: np.ndarray, theta_hours: float) -> float:
    """Fast time_on_task(sessionize(...)) for a sorted epoch array."""
    if timestamps.size < 2:
        return 0.0
    gaps = np.diff(timestamps)
    return float(gaps[gaps <= threshold_seconds(theta_hours)].sum()) / 3600.0


def user_assignment_streams(answer_events, login_events) -> dict:
    """``{(user_id, set_id): EventStream}`` for every pair with a submission."""
    subs = defaultdict(list)
    logins = defaultdict(list)
    for ev in answer_events:
        subs[(ev.user_id, ev.set_id)].append(ev.epoch_seconds)
    for ev in login_events:
        if ev.success:
            if ev.epoch_seconds is None:
                raise ValueError("login events must be reconciled to epoch seconds first")
            logins[ev.user_id].append(ev.epoch_seconds)
    out = {}
    for (user, set_id), times in sorted(subs.items()):
        times = sorted(times)
        out[(user, set_id)] = EventStream(
            user, set_id, tuple(sorted(times + logins.get(user, []))), tuple(times)
        )
    return out
