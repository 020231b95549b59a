"""Parsing of WeBWorK ``answer_log`` and ``login.log`` files plus the
delimited side tables (LMS hours, roster, deadlines, problem weights).

Answer log lines look like::

    [Fri Dec 02 23:01:19 2016] |76ARTLFSBF01|Assignment_12|24|1 1480748479 (120^2) / (32*2 )

and login lines like::

    [Wed Oct 26 13:47:33 2016] LOGIN OK user_id=6834XIFTZ503 login_type=normal credential_source=LTI host=... port=40001 UA=...

The bracketed date is server-local time. Answer lines also carry a Unix
epoch, which is what the analysis uses; login lines only have the local
date, so they are placed on the epoch axis with the offset recovered by
:func:`infer_utc_offset`.
"""

from __future__ import annotations

import calendar
import csv
import json
import math
import os
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Union

from .errors import (
    DuplicateKey,
    EmptyInput,
    InconsistentOffsets,
    MalformedLine,
    MissingFile,
    NonNumericValue,
    RejectedRow,
)

STAMP_FORMAT = "%a %b %d %H:%M:%S %Y"
FAILURE_PREFIX = "AUTH WwDB: password rejected, deferring to site_checkPassword"

# time zone offsets are whole quarter hours
OFFSET_GRANULARITY = 900
DST_SHIFT = 3600
OFFSET_TOLERANCE = 0.05

LMS_FILE = "lms_times.csv"
ROSTER_FILE = "roster.csv"
DEADLINES_FILE = "deadlines.csv"
WEIGHTS_FILE = "weights.csv"

_BRACKET = re.compile(r"^\[([^\]]*)\]")
_FLAGS = re.compile(r"^[01]+$")
_FAILURE = re.compile(r"^AUTH\b|LOGIN FAIL|rejected", re.IGNORECASE)
_KEY = {
    key: re.compile(rf"(?:^|\s){key}=(\S+)")
    for key in ("user_id", "login_type", "credential_source", "host", "port")
}
_BARE_HOST = re.compile(r"(?:^|\s)([^\s=]+)\s+port=")


@dataclass(frozen=True, slots=True)
class AnswerEvent:
    local_stamp: datetime
    user_id: str
    set_id: str
    problem_number: int
    flags: str
    epoch_seconds: int
    answer_text: str = ""

    @property
    def fraction_correct(self) -> float:
        return self.flags.count("1") / len(self.flags)

    @property
    def fully_correct(self) -> bool:
        return "0" not in self.flags


@dataclass(frozen=True, slots=True)
class LoginEvent:
    local_stamp: datetime
    user_id: str
    success: bool
    credential_source: str = ""
    host: str = ""
    port: Optional[int] = None
    user_agent: str = ""
    login_type: str = ""
    # filled in by reconcile_logins once the server offset is known
    epoch_seconds: Optional[int] = None


@dataclass(frozen=True)
class RosterEntry:
    self_report: Optional[str] = None
    official_score: Optional[float] = None


@dataclass
class CourseTables:
    lms_hours: dict = field(default_factory=dict)
    attributes: dict = field(default_factory=dict)
    deadlines: dict = field(default_factory=dict)
    weights: dict = field(default_factory=dict)
    rejected: list = field(default_factory=list)

    def weight(self, set_id: str, problem_number: int) -> float:
        return self.weights.get((set_id, problem_number), 1.0)


@dataclass
class IngestReport:
    """Result of reading one log file."""

    events: list
    lines_read: int = 0
    rejected: int = 0
    skipped: int = 0
    samples: list = field(default_factory=list)

    MAX_SAMPLES = 20

    def reject(self, err: MalformedLine) -> None:
        self.rejected += 1
        if len(self.samples) < self.MAX_SAMPLES:
            self.samples.append((err.lineno, err.reason))


def local_as_utc(stamp: datetime) -> int:
    """Seconds since the epoch if the naive ``stamp`` were read as UTC."""
    return calendar.timegm(stamp.timetuple())


def _as_text(line) -> str:
    if isinstance(line, (bytes, bytearray)):
        line = bytes(line).decode("utf-8", errors="replace")
    return line.rstrip("\r\n")


def _parse_stamp(text: str, line: str, lineno) -> datetime:
    try:
        return datetime.strptime(text.strip(), STAMP_FORMAT)
    except ValueError:
        raise MalformedLine(f"unparseable date {text!r}", line, lineno) from None


def parse_answer_line(line, lineno: Optional[int] = None) -> AnswerEvent:
    """Parse one answer-log line.

    Raises :class:`MalformedLine` (and nothing else) for any input that
    does not follow the grammar, including arbitrary bytes.
    """
    try:
        text = _as_text(line)
    except Exception:
        raise MalformedLine("not a text line", None, lineno) from None
    if "\n" in text or "\r" in text:
        raise MalformedLine("embedded newline", text, lineno)
    m = _BRACKET.match(text)
    if m is None:
        raise MalformedLine("missing bracketed date", text, lineno)
    parts = text[m.end():].split("|", 4)
    if len(parts) < 5:
        raise MalformedLine("fewer than 4 '|' separators", text, lineno)
    lead, user_id, set_id, problem, tail = parts
    if lead.strip():
        raise MalformedLine("unexpected text before first '|'", text, lineno)
    if not user_id or not set_id:
        raise MalformedLine("empty user or set id", text, lineno)
    if not (problem.isascii() and problem.isdigit()):
        raise MalformedLine(f"non-integer problem number {problem!r}", text, lineno)
    tokens = tail.split(None, 2)
    if len(tokens) < 2:
        raise MalformedLine("missing flags or epoch", text, lineno)
    flags, epoch = tokens[0], tokens[1]
    if not _FLAGS.match(flags):
        raise MalformedLine(f"non-bit flags {flags!r}", text, lineno)
    if not (epoch.isascii() and epoch.isdigit()) or int(epoch) <= 0:
        raise MalformedLine(f"bad epoch {epoch!r}", text, lineno)
    stamp = _parse_stamp(m.group(1), text, lineno)
    return AnswerEvent(
        local_stamp=stamp,
        user_id=user_id,
        set_id=set_id,
        problem_number=int(problem),
        flags=flags,
        epoch_seconds=int(epoch),
        answer_text=tokens[2] if len(tokens) == 3 else "",
    )


def format_answer_line(event: AnswerEvent) -> str:
    head = (
        f"[{event.local_stamp.strftime(STAMP_FORMAT)}] |{event.user_id}|{event.set_id}"
        f"|{event.problem_number}|{event.flags} {event.epoch_seconds}"
    )
    return f"{head} {event.answer_text}" if event.answer_text else head


def parse_login_line(line, lineno: Optional[int] = None) -> Optional[LoginEvent]:
    """Parse one login-log line.

    Returns ``None`` for lines that are neither a successful login nor an
    authentication failure: blank lines, wrapped user-agent continuations,
    session timeouts and anything else without a leading bracketed date.
    """
    text = _as_text(line)
    m = _BRACKET.match(text)
    if m is None:
        return None
    body = text[m.end():].strip()
    if body.startswith("LOGIN OK"):
        success = True
    elif _FAILURE.search(body):
        success = False
    else:
        return None

    ua_at = body.find("UA=")
    if ua_at >= 0 and (ua_at == 0 or body[ua_at - 1].isspace()):
        head, user_agent = body[:ua_at], body[ua_at + 3:]
    else:
        head, user_agent = body, ""

    values = {}
    for key, pattern in _KEY.items():
        km = pattern.search(head)
        values[key] = km.group(1) if km else ""
    if not values["user_id"]:
        raise MalformedLine("no user_id", text, lineno)
    if not values["host"]:
        hm = _BARE_HOST.search(head)
        if hm:
            values["host"] = hm.group(1)
    port = int(values["port"]) if values["port"].isdigit() else None

    return LoginEvent(
        local_stamp=_parse_stamp(m.group(1), text, lineno),
        user_id=values["user_id"],
        success=success,
        credential_source=values["credential_source"],
        host=values["host"],
        port=port,
        user_agent=user_agent,
        login_type=values["login_type"],
    )


def format_login_line(event: LoginEvent) -> str:
    parts = [
        f"[{event.local_stamp.strftime(STAMP_FORMAT)}]",
        "LOGIN OK" if event.success else FAILURE_PREFIX,
        f"user_id={event.user_id}",
    ]
    if event.login_type:
        parts.append(f"login_type={event.login_type}")
    if event.credential_source:
        parts.append(f"credential_source={event.credential_source}")
    if event.host:
        parts.append(f"host={event.host}")
    if event.port is not None:
        parts.append(f"port={event.port}")
    parts.append(f"UA={event.user_agent}")
    return " ".join(parts)


def _lines(source) -> Iterable[str]:
    if isinstance(source, (str, os.PathLike)):
        path = Path(source)
        if not path.is_file():
            raise MissingFile(f"no such log file: {path}")
        with open(path, encoding="utf-8", errors="replace", newline="") as fh:
            yield from fh
    else:
        yield from source


def read_answer_log(source) -> IngestReport:
    """Parse every line of an answer log; bad lines are counted, not fatal.

    ``source`` is a path or an iterable of lines.
    """
    report = IngestReport(events=[])
    for lineno, line in enumerate(_lines(source), start=1):
        report.lines_read += 1
        if not _as_text(line).strip():
            report.skipped += 1
            continue
        try:
            report.events.append(parse_answer_line(line, lineno))
        except MalformedLine as err:
            report.reject(err)
    return report


def read_login_log(source) -> IngestReport:
    report = IngestReport(events=[])
    for lineno, line in enumerate(_lines(source), start=1):
        report.lines_read += 1
        try:
            event = parse_login_line(line, lineno)
        except MalformedLine as err:
            report.reject(err)
            continue
        if event is None:
            report.skipped += 1
        else:
            report.events.append(event)
    return report


def infer_utc_offset(events: Iterable[AnswerEvent]) -> int:
    """Server offset from UTC in seconds (negative west of Greenwich).

    Each answer event carries both the local bracket date and the epoch;
    their difference, rounded to the nearest quarter hour to absorb the
    few seconds between submission and log write, votes for an offset.
    The most common vote wins, smallest value on ties.
    """
    votes = Counter()
    total = 0
    for ev in events:
        raw = local_as_utc(ev.local_stamp) - ev.epoch_seconds
        votes[OFFSET_GRANULARITY * round(raw / OFFSET_GRANULARITY)] += 1
        total += 1
    if total == 0:
        raise EmptyInput("cannot infer an offset from zero answer events")
    top = max(votes.values())
    mode = min(off for off, n in votes.items() if n == top)
    disagree = sum(
        n for off, n in votes.items() if off - mode not in (0, DST_SHIFT, -DST_SHIFT)
    )
    if disagree > OFFSET_TOLERANCE * total:
        warnings.warn(
            f"{disagree} of {total} answer events disagree with modal offset {mode} s",
            InconsistentOffsets,
            stacklevel=2,
        )
    return mode


def reconcile_logins(logins: Iterable[LoginEvent], offset_seconds: int) -> list:
    """Attach epoch seconds to login events using the server offset."""
    return [
        replace(ev, epoch_seconds=local_as_utc(ev.local_stamp) - offset_seconds)
        for ev in logins
    ]


def event_record(event) -> dict:
    if isinstance(event, AnswerEvent):
        return {
            "kind": "answer",
            "user_id": event.user_id,
            "epoch": event.epoch_seconds,
            "local": event.local_stamp.isoformat(),
            "set_id": event.set_id,
            "problem": event.problem_number,
            "flags": event.flags,
            "answer": event.answer_text,
        }
    return {
        "kind": "login",
        "user_id": event.user_id,
        "epoch": event.epoch_seconds,
        "local": event.local_stamp.isoformat(),
        "success": event.success,
        "login_type": event.login_type,
        "credential_source": event.credential_source,
        "host": event.host,
        "port": event.port,
        "user_agent": event.user_agent,
    }


def write_events_jsonl(answers, logins, path) -> None:
    """Normalized events, one JSON object per line, ordered by epoch then
    input order (answers before logins)."""
    merged = [(ev.epoch_seconds, i, ev) for i, ev in enumerate(answers)]
    base = len(merged)
    merged += [
        (ev.epoch_seconds if ev.epoch_seconds is not None else -1, base + i, ev)
        for i, ev in enumerate(logins)
    ]
    merged.sort(key=lambda t: (t[0], t[1]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for _, _, ev in merged:
            fh.write(json.dumps(event_record(ev), ensure_ascii=False))
            fh.write("\n")


# -- side tables --------------------------------------------------------------


def _rows(path: Path, required: tuple):
    if not path.is_file():
        raise MissingFile(f"no such table: {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise NonNumericValue(f"{path.name}: missing column(s) {missing}")
        for lineno, row in enumerate(reader, start=2):
            yield lineno, {k: (v or "").strip() for k, v in row.items() if k}


def _number(text: str, what: str, *, lo: float = 0.0, hi: float = math.inf) -> float:
    try:
        value = float(text)
    except ValueError:
        raise NonNumericValue(f"{what} {text!r} is not a number") from None
    if not math.isfinite(value):
        raise NonNumericValue(f"{what} {text!r} is not finite")
    if value < lo or value > hi:
        raise NonNumericValue(f"{what} {value} outside [{lo}, {hi}]")
    return value


def parse_deadline(text: str, local_offset_seconds: int = 0) -> int:
    """Epoch seconds for an ISO-8601 deadline or a bare epoch integer.

    Naive timestamps are read as server-local time with the given offset.
    """
    text = text.strip()
    if text.isdigit():
        return int(text)
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        stamp = datetime.fromisoformat(text)
    except ValueError:
        raise NonNumericValue(f"deadline {text!r} is not ISO-8601") from None
    if stamp.tzinfo is None:
        return local_as_utc(stamp) - local_offset_seconds
    return int(stamp.astimezone(timezone.utc).timestamp())


def _load(path, required, tables, target, convert):
    path = Path(path)
    for lineno, row in _rows(path, required):
        try:
            key, value = convert(row)
        except NonNumericValue as err:
            msg = f"{path.name}:{lineno}: {err}"
            tables.rejected.append(msg)
            warnings.warn(msg, RejectedRow, stacklevel=3)
            continue
        if key in target:
            warnings.warn(f"{path.name}:{lineno}: duplicate key {key!r}, last wins",
                          DuplicateKey, stacklevel=3)
        target[key] = value


def load_course_tables(
    lms=None,
    roster=None,
    deadlines=None,
    weights=None,
    *,
    local_offset_seconds: int = 0,
) -> CourseTables:
    """Read whichever side tables are given; omitted ones stay empty.

    Rows with bad values are dropped with a :class:`RejectedRow` warning and
    listed in ``CourseTables.rejected``.
    """
    tables = CourseTables()

    def lms_row(row):
        if not row["user_id"]:
            raise NonNumericValue("empty user_id")
        return row["user_id"], _number(row["hours"], "hours")

    def roster_row(row):
        if not row["user_id"]:
            raise NonNumericValue("empty user_id")
        score = row.get("official_score", "")
        return row["user_id"], RosterEntry(
            self_report=row.get("self_report") or None,
            official_score=_number(score, "official_score", hi=1.0) if score else None,
        )

    def deadline_row(row):
        return row["set_id"], parse_deadline(row["deadline_iso8601"], local_offset_seconds)

    def weight_row(row):
        problem = row["problem"]
        if not problem.isdigit():
            raise NonNumericValue(f"problem {problem!r} is not an integer")
        return (row["set_id"], int(problem)), _number(row["points"], "points")

    if lms is not None:
        _load(lms, ("user_id", "hours"), tables, tables.lms_hours, lms_row)
    if roster is not None:
        _load(roster, ("user_id",), tables, tables.attributes, roster_row)
    if deadlines is not None:
        _load(deadlines, ("set_id", "deadline_iso8601"), tables, tables.deadlines, deadline_row)
    if weights is not None:
        _load(weights, ("set_id", "problem", "points"), tables, tables.weights, weight_row)
    return tables


def load_tables_dir(directory, *, require_lms: bool = False,
                    local_offset_seconds: int = 0) -> CourseTables:
    """Load the standard table files present in ``directory``."""
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingFile(f"no such tables directory: {directory}")

    def present(name):
        p = directory / name
        return p if p.is_file() else None

    lms = present(LMS_FILE)
    if require_lms and lms is None:
        raise MissingFile(f"{directory / LMS_FILE} is required")
    return load_course_tables(
        lms=lms,
        roster=present(ROSTER_FILE),
        deadlines=present(DEADLINES_FILE),
        weights=present(WEIGHTS_FILE),
        local_offset_seconds=local_offset_seconds,
    )
