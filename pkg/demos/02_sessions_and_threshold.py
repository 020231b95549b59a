"""
Activity sessions and the inactivity threshold
==============================================

A session ends when the next event is more than theta hours away. Total
time on task only grows as theta grows.
"""

import numpy as np

from wwlogs import sessions

# Events at 0, 10 and 30 minutes, then one more at 3h20.
ts = [0, 600, 1800, 12000]
found = sessions.sessionize(ts, 0.95)
for s in found:
    print(f"session {s.start_epoch}..{s.end_epoch}  {s.event_count} events  "
          f"{s.length_hours:.2f} h")
print("time on task:", sessions.time_on_task(found), "h")

# %%
# Sweep the threshold on one random student timeline.
rng = np.random.default_rng(0)
timeline = np.cumsum(rng.exponential(1200, size=80)).astype(int)
for theta in (0.1, 0.25, 0.5, 0.95, 2.0):
    s = sessions.sessionize(timeline, theta)
    print(f"theta {theta:4.2f} h: {len(s):3d} sessions, {sessions.time_on_task(s):6.2f} h")

# %%
# Assignment totals count only sessions holding a submission to that
# assignment, so two assignments worked in one sitting add up to more than
# the whole-course total.
from datetime import datetime

from wwlogs.ingest import AnswerEvent

events = [AnswerEvent(datetime(2016, 1, 1), "u", set_id, 1, "1", t)
          for set_id, t in [("A", 0), ("A", 600), ("B", 1200), ("B", 1800),
                            ("A", 2400), ("B", 3000)]]
course = sessions.course_total_time(events, [], "u")
per_set = {s: sessions.time_on_task(sessions.sessionize(
    sessions.build_event_stream(events, [], "u", s))) for s in "AB"}
print("course total:", round(course, 3), "per assignment:", per_set)
