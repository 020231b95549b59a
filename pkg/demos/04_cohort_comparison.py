"""
Comparing low and high scoring students
=======================================

Split the class at a 50% homework score and report mean(SD) per group
with Cohen's d for each metric.
"""

import tempfile

from wwlogs import cohort, ingest, pipeline, synth

course = synth.generate_course(synth.GeneratorParams(seed=2016, n_students=200))
tmp = tempfile.mkdtemp()
paths = synth.write_logs(course, tmp)
logs = pipeline.load_logs(paths[synth.ANSWER_LOG], paths[synth.LOGIN_LOG])
tables = ingest.load_tables_dir(tmp, local_offset_seconds=logs.offset_seconds)
result = pipeline.analyze(logs, 0.95, tables)

split = cohort.split_groups(result.aggregates, 0.5)
print(f"low group: {len(split.low)}  high group: {len(split.high)}\n")

metrics = ["points_per_hour", "problems_per_hour", "persistence_hours",
           "persistence_attempts", "total_hours", "mean_session_hours", "session_count",
           "first_last_submission_days", "mean_between_session_hours",
           "first_submission_days_before_deadline"]
rows = cohort.compare_table(split, result.aggregates, metrics)
print(f"{'metric':<38} {'< 50%':>14} {'>= 50%':>14}      d")
for r in rows:
    d = "" if r.cohens_d is None else f"{r.cohens_d:+.2f}"
    print(f"{r.metric:<38} {r.cell('low'):>14} {r.cell('high'):>14} {d:>6}")

# %%
# Text histogram of problems attempted per hour, both groups on shared edges.
h = cohort.group_histograms(split, result.aggregates, "problems_per_hour")


def bar(hist, i, width=30):
    return "#" * round(width * hist.counts[i] / max(sum(hist.counts), 1))


print("\nproblems per hour (bar = share of the group)")
for i, (lo, hi) in enumerate(zip(h["low"].edges, h["low"].edges[1:])):
    print(f"{lo:6.1f}-{hi:6.1f}  low {bar(h['low'], i):<30} high {bar(h['high'], i)}")

# %%
# Group summaries alone (mean, SD, n) are enough to compute d.
print("\nd from (7.2, 4.7, 64) vs (5.1, 2.2, 209):",
      round(cohort.cohens_d((7.2, 4.7, 64), (5.1, 2.2, 209)), 3))
