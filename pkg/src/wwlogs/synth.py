"""Deterministic synthetic WeBWorK courses with known ground truth.

Every session opens with a ``LOGIN OK`` line followed by answer
submissions. Gaps inside a session never exceed ``margin * theta_true``
and gaps between a student's sessions (across all assignments) are at
least ``between_factor * theta_true``, so sessionizing at any threshold
between those bounds recovers the planted sessions exactly.

Two student profiles are planted. The "low" profile starts later, works
in fewer and shorter sessions, moves between problems faster and gives
up sooner; the "high" profile does the opposite.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import InvalidParams
from .ingest import (
    DEADLINES_FILE,
    LMS_FILE,
    AnswerEvent,
    LoginEvent,
    format_answer_line,
    format_login_line,
)

ANSWER_LOG = "answer_log"
LOGIN_LOG = "login.log"
TRUTH_FILE = "ground_truth.json"

DAY = 86400
HOUR = 3600

# 2016-09-06 00:00 at UTC-8
DEFAULT_COURSE_START = 1473148800

ANSWER_POOL = (
    "(sqrt(3)/2)+pi/12",
    "(120^2) / (32*2 )",
    "9*(-9^(1/3))/(1+-9^(1/3))",
    "2.6678",
    "-18",
    "7.006",
    "1/2(10-(1+pi/2)(20/(4+pi)))",
    "3x^2-2x+1",
    "e^(2t)*cos(t)",
    "ln(5)/2",
    "DNE",
    "0.25",
)

USER_AGENTS = (
    "Mozilla/5.0 (Macintosh; Intel Mac OS X 10_12) AppleWebKit/602.1.50 (KHTML, like Gecko) Version/10.0 Safari/602.1.50",
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/53.0.2785.143 Safari/537.36",
    "Mozilla/5.0 (X11; Linux x86_64; rv:49.0) Gecko/20100101 Firefox/49.0",
    "Mozilla/5.0 (iPhone; CPU iPhone OS 10_1 like Mac OS X) AppleWebKit/602.2.14 (KHTML, like Gecko) Mobile/14B72",
)

_ID_CHARS = np.array(list("ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"))


@dataclass(frozen=True)
class Profile:
    sessions_per_assignment: tuple = (3, 6)
    # minutes between consecutive events inside a session
    gap_minutes: tuple = (3.0, 15.0)
    start_days_before_deadline: tuple = (2.0, 5.0)
    # extra hours added on top of the minimum between-session gap
    extra_between_hours: tuple = (0.0, 14.0)
    attempt_probability: float = 0.95
    completion_probability: float = 0.85
    attempts_complete: tuple = (1, 4)
    attempts_incomplete: tuple = (3, 7)


LOW_PROFILE = Profile(
    sessions_per_assignment=(1, 3),
    gap_minutes=(1.0, 4.0),
    start_days_before_deadline=(0.3, 1.5),
    extra_between_hours=(0.0, 14.0),
    attempt_probability=0.6,
    completion_probability=0.45,
    attempts_complete=(1, 3),
    attempts_incomplete=(1, 3),
)

HIGH_PROFILE = Profile()


@dataclass(frozen=True)
class GeneratorParams:
    seed: int = 0
    n_students: int = 60
    n_assignments: int = 6
    problems_per_assignment: int = 10
    theta_true: float = 0.95
    margin: float = 0.5
    between_factor: float = 2.0
    low_fraction: float = 0.25
    direct_access_fraction: float = 0.1
    # LMS hours of direct-access students as a fraction of their true hours
    direct_access_lms_ratio: tuple = (0.05, 0.3)
    lms_noise_fraction: float = 0.05
    max_blanks: int = 3
    failed_login_probability: float = 0.05
    utc_offset_seconds: int = -8 * HOUR
    course_start_epoch: int = DEFAULT_COURSE_START
    assignment_period_days: float = 7.0
    low: Profile = LOW_PROFILE
    high: Profile = HIGH_PROFILE

    def validate(self) -> "GeneratorParams":
        problems = []
        if self.n_students < 0 or self.n_assignments < 0 or self.problems_per_assignment < 1:
            problems.append("counts must be non-negative (at least one problem per set)")
        if not self.theta_true > 0:
            problems.append("theta_true must be > 0")
        if not 0 < self.margin < 1 < self.between_factor:
            problems.append("need 0 < margin < 1 < between_factor")
        if self.max_blanks < 1:
            problems.append("max_blanks must be >= 1")
        if self.assignment_period_days <= 0:
            problems.append("assignment_period_days must be > 0")
        probs = [self.low_fraction, self.direct_access_fraction,
                 self.lms_noise_fraction, self.failed_login_probability]
        for prof in (self.low, self.high):
            probs += [prof.attempt_probability, prof.completion_probability]
            for name in ("sessions_per_assignment", "gap_minutes", "start_days_before_deadline",
                         "extra_between_hours", "attempts_complete", "attempts_incomplete"):
                lo, hi = getattr(prof, name)
                if lo > hi or lo < 0:
                    problems.append(f"profile range {name} must satisfy 0 <= lo <= hi")
            if prof.sessions_per_assignment[0] < 1 or prof.attempts_complete[0] < 1 \
                    or prof.attempts_incomplete[0] < 1:
                problems.append("session and attempt counts must be >= 1")
        if not all(0 <= p <= 1 for p in probs):
            problems.append("probabilities and fractions must lie in [0, 1]")
        lo, hi = self.direct_access_lms_ratio
        if not 0 <= lo <= hi < 0.5:
            problems.append("direct_access_lms_ratio must lie in [0, 0.5)")
        if problems:
            raise InvalidParams("; ".join(problems))
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorParams":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise InvalidParams(f"unknown parameter(s): {sorted(extra)}")
        kwargs = {}
        for key, value in data.items():
            if key in ("low", "high"):
                base = LOW_PROFILE if key == "low" else HIGH_PROFILE
                pfields = {f.name for f in fields(Profile)}
                if not isinstance(value, dict) or set(value) - pfields:
                    raise InvalidParams(f"bad profile {key!r}")
                value = Profile(**{**asdict(base), **{
                    k: tuple(v) if isinstance(v, list) else v for k, v in value.items()}})
            elif isinstance(value, list):
                value = tuple(value)
            kwargs[key] = value
        try:
            return cls(**kwargs).validate()
        except TypeError as err:
            raise InvalidParams(str(err)) from None


@dataclass
class UserTruth:
    group: str
    direct_access: bool
    course_hours: float
    lms_hours: float
    # set_id -> list of (start_epoch, end_epoch, event_count)
    sessions: dict = field(default_factory=dict)

    def assignment_hours(self, set_id: str) -> float:
        return sum(e - s for s, e, _ in self.sessions.get(set_id, ())) / HOUR

    def course_sessions(self) -> list:
        return sorted(s for v in self.sessions.values() for s in v)


@dataclass
class GroundTruth:
    users: dict = field(default_factory=dict)
    deadlines: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "deadlines": dict(sorted(self.deadlines.items())),
            "users": {
                u: {
                    "group": t.group,
                    "direct_access": t.direct_access,
                    "course_hours": t.course_hours,
                    "lms_hours": t.lms_hours,
                    "assignments": {
                        s: {"sessions": [list(x) for x in sess],
                            "total_hours": t.assignment_hours(s)}
                        for s, sess in sorted(t.sessions.items())
                    },
                }
                for u, t in sorted(self.users.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroundTruth":
        users = {
            u: UserTruth(
                group=d["group"],
                direct_access=d["direct_access"],
                course_hours=d["course_hours"],
                lms_hours=d["lms_hours"],
                sessions={s: [tuple(x) for x in a["sessions"]]
                          for s, a in d["assignments"].items()},
            )
            for u, d in data["users"].items()
        }
        return cls(users, dict(data["deadlines"]))


@dataclass
class SyntheticCourse:
    params: GeneratorParams
    answer_lines: list
    login_lines: list
    lms_hours: dict
    truth: GroundTruth

    @property
    def deadlines(self) -> dict:
        return self.truth.deadlines


def _local(epoch: int, offset: int) -> datetime:
    return datetime.fromtimestamp(epoch + offset, timezone.utc).replace(tzinfo=None)


def _user_ids(rng, n):
    ids, seen = [], set()
    while len(ids) < n:
        uid = "".join(rng.choice(_ID_CHARS, 10)) + f"{int(rng.integers(0, 100)):02d}"
        if uid not in seen:
            seen.add(uid)
            ids.append(uid)
    return ids


def _flags(rng, blanks: int, correct: bool) -> str:
    if correct:
        return "1" * blanks
    bits = rng.integers(0, 2, blanks)
    if bits.all():
        bits[int(rng.integers(0, blanks))] = 0
    return "".join(str(int(b)) for b in bits)


def _answer_text(rng, blanks: int) -> str:
    picks = rng.integers(0, len(ANSWER_POOL), blanks)
    return " ".join(ANSWER_POOL[int(i)] for i in picks)


def _randint(rng, bounds) -> int:
    return int(rng.integers(bounds[0], bounds[1] + 1))


def _uniform(rng, bounds) -> float:
    return float(rng.uniform(bounds[0], bounds[1]))


def generate_course(params: GeneratorParams) -> SyntheticCourse:
    """Build a course; identical params (seed included) give identical output."""
    p = params.validate()
    rng = np.random.default_rng(p.seed)
    max_gap = int(math.floor(p.margin * p.theta_true * HOUR))
    min_between = int(math.ceil(p.between_factor * p.theta_true * HOUR))
    if max_gap < 1:
        raise InvalidParams("margin * theta_true is below one second")

    set_ids = [f"Assignment_{a + 1:02d}" for a in range(p.n_assignments)]
    deadlines = {
        s: int(p.course_start_epoch + round((a + 1) * p.assignment_period_days * DAY))
        for a, s in enumerate(set_ids)
    }
    blanks = {
        (s, q): _randint(rng, (1, p.max_blanks))
        for s in set_ids for q in range(1, p.problems_per_assignment + 1)
    }

    users = _user_ids(rng, p.n_students)
    order = rng.permutation(p.n_students)
    n_low = int(round(p.low_fraction * p.n_students))
    low_users = {users[i] for i in order[:n_low]}
    order = rng.permutation(p.n_students)
    n_direct = int(round(p.direct_access_fraction * p.n_students))
    direct_users = {users[i] for i in order[:n_direct]}

    answers, logins = [], []
    truth = GroundTruth(deadlines=dict(deadlines))

    for uid in users:
        group = "low" if uid in low_users else "high"
        prof = p.low if group == "low" else p.high
        host = ".".join(str(int(x)) for x in rng.integers(1, 255, 4))
        agent = USER_AGENTS[int(rng.integers(0, len(USER_AGENTS)))]
        source = "params" if uid in direct_users else "LTI"

        # plan sessions per assignment as (planned_start, set_id, [(dt, problem, flags)])
        planned = []
        for s in set_ids:
            subs = []
            for q in range(1, p.problems_per_assignment + 1):
                if rng.random() >= prof.attempt_probability:
                    continue
                b = blanks[(s, q)]
                if rng.random() < prof.completion_probability:
                    k = _randint(rng, prof.attempts_complete)
                    subs += [(q, _flags(rng, b, i == k - 1)) for i in range(k)]
                else:
                    k = _randint(rng, prof.attempts_incomplete)
                    subs += [(q, _flags(rng, b, False)) for _ in range(k)]
            if not subs:
                continue
            n_sess = min(_randint(rng, prof.sessions_per_assignment), len(subs))
            cuts = sorted(rng.choice(np.arange(1, len(subs)), n_sess - 1, replace=False)) \
                if n_sess > 1 else []
            chunks = np.split(np.arange(len(subs)), cuts)
            start = deadlines[s] - int(round(_uniform(rng, prof.start_days_before_deadline) * DAY))
            for chunk in chunks:
                offsets, t = [], 0
                for idx in chunk:
                    gap = int(round(_uniform(rng, prof.gap_minutes) * 60))
                    t += min(max(gap, 1), max_gap)
                    offsets.append((t, subs[idx][0], subs[idx][1]))
                planned.append((start, s, offsets))
                extra = int(round(_uniform(rng, prof.extra_between_hours) * HOUR))
                start += offsets[-1][0] + min_between + extra

        # lay all sessions on one timeline, pushing later ones to respect the gap floor
        planned.sort(key=lambda x: (x[0], x[1]))
        sessions = {}
        prev_end = None
        for start, s, offsets in planned:
            if prev_end is not None and start < prev_end + min_between:
                start = prev_end + min_between
            if rng.random() < p.failed_login_probability:
                fail_at = start - _randint(rng, (5, 60))
                logins.append(LoginEvent(
                    _local(fail_at, p.utc_offset_seconds), uid, False,
                    credential_source="params", host=host,
                    port=_randint(rng, (40000, 60000)), user_agent=agent,
                    login_type="normal", epoch_seconds=fail_at))
            logins.append(LoginEvent(
                _local(start, p.utc_offset_seconds), uid, True,
                credential_source=source, host=host, port=_randint(rng, (40000, 60000)),
                user_agent=agent, login_type="normal", epoch_seconds=start))
            for dt, q, flags in offsets:
                epoch = start + dt
                answers.append(AnswerEvent(
                    _local(epoch, p.utc_offset_seconds), uid, s, q, flags, epoch,
                    _answer_text(rng, len(flags))))
            end = start + offsets[-1][0]
            sessions.setdefault(s, []).append((start, end, len(offsets) + 1))
            prev_end = end

        course_hours = sum(e - st for v in sessions.values() for st, e, _ in v) / HOUR
        if uid in direct_users:
            lms = course_hours * _uniform(rng, p.direct_access_lms_ratio)
        else:
            lms = course_hours * (1.0 + _uniform(rng, (-p.lms_noise_fraction, p.lms_noise_fraction)))
        truth.users[uid] = UserTruth(group, uid in direct_users, course_hours,
                                     round(lms, 4), dict(sorted(sessions.items())))

    answers.sort(key=lambda e: (e.epoch_seconds, e.user_id, e.set_id, e.problem_number))
    logins.sort(key=lambda e: (e.epoch_seconds, e.user_id, e.success))
    return SyntheticCourse(
        params=p,
        answer_lines=[format_answer_line(e) for e in answers],
        login_lines=[format_login_line(e) for e in logins],
        lms_hours={u: t.lms_hours for u, t in sorted(truth.users.items())},
        truth=truth,
    )


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _lines_text(lines) -> str:
    return "".join(f"{line}\n" for line in lines)


def write_logs(course: SyntheticCourse, directory) -> dict:
    """Write the course to ``directory``; returns ``{name: path}``.

    Each file is written to a temporary sibling and renamed into place.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    offset = course.params.utc_offset_seconds
    deadline_rows = [
        f"{s},{_local(e, offset).isoformat()}{_offset_suffix(offset)}"
        for s, e in sorted(course.deadlines.items())
    ]
    contents = {
        ANSWER_LOG: _lines_text(course.answer_lines),
        LOGIN_LOG: _lines_text(course.login_lines),
        LMS_FILE: _lines_text(["user_id,hours"] + [
            f"{u},{h:.4f}" for u, h in sorted(course.lms_hours.items())]),
        DEADLINES_FILE: _lines_text(["set_id,deadline_iso8601"] + deadline_rows),
        TRUTH_FILE: json.dumps({"params": course.params.to_dict(),
                                **course.truth.to_dict()}, indent=1) + "\n",
    }
    paths = {}
    for name, text in contents.items():
        path = directory / name
        _atomic_write(path, text)
        paths[name] = path
    return paths


def _offset_suffix(offset: int) -> str:
    sign = "+" if offset >= 0 else "-"
    hours, rem = divmod(abs(offset), HOUR)
    return f"{sign}{hours:02d}:{rem // 60:02d}"


def load_truth(path) -> GroundTruth:
    with open(path, encoding="utf-8") as fh:
        return GroundTruth.from_dict(json.load(fh))
