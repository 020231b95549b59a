"""
Reading answer and login logs
=============================

Parse raw log lines, recover the server's clock offset and put login
events on the same epoch axis as answer submissions.
"""

from wwlogs import ingest

# A few answer-log lines. The bracketed stamp is server-local time, the
# integer after the flags is the epoch.
answer_lines = [
    "[Fri Dec 02 23:01:13 2016] |AMFFPSX4I202|Assignment_12|10|0 1480748473 (sqrt(3)/2)+pi/12",
    "[Fri Dec 02 23:01:19 2016] |76ARTLFSBF01|Assignment_12|24|1 1480748479 (120^2) / (32*2 )",
    "[Fri Dec 02 23:04:39 2016] |CL9JMXD1PK09|Assignment_12|0|110 1480748679 3/2s^2",
    "not a log line",
]

report = ingest.read_answer_log(answer_lines)
print(f"{len(report.events)} events, {report.rejected} rejected")
for lineno, reason in report.samples:
    print(f"  line {lineno}: {reason}")

first = report.events[0]
print(first.user_id, first.set_id, first.problem_number, first.flags, first.fraction_correct)

# The last event got two of three blanks right.
print("partial credit:", round(report.events[-1].fraction_correct, 3))

# %%
# Login lines carry only a local stamp. The offset inferred from answers
# converts them to epoch seconds. Wrapped continuation lines are skipped.
offset = ingest.infer_utc_offset(report.events)
print("server offset (s):", offset)

login_lines = [
    "[Fri Dec 02 22:55:02 2016] LOGIN OK user_id=AMFFPSX4I202 login_type=normal "
    "credential_source=LTI host=10.0.0.1 port=40001 UA=Mozilla/5.0",
    "UA=Mozilla/5.0 (wrapped continuation)",
]
logins = ingest.reconcile_logins(ingest.read_login_log(login_lines).events, offset)
print(logins[0].user_id, logins[0].success, logins[0].epoch_seconds)

# %%
# Every parsed line formats back to the exact original text.
line = answer_lines[1]
assert ingest.format_answer_line(ingest.parse_answer_line(line)) == line
print("round trip ok")
