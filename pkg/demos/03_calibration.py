"""
Calibrating the threshold against LMS time
==========================================

Generate a course whose students also have an LMS time record, then pick
the threshold whose regression slope of LMS hours on WeBWorK hours is
closest to one. Students who reached WeBWorK directly have tiny LMS totals
and are removed as outliers before fitting.
"""

import tempfile

from wwlogs import calibration, ingest, pipeline, sessions, synth

course = synth.generate_course(synth.GeneratorParams(seed=2016, n_students=200))
tmp = tempfile.mkdtemp()
paths = synth.write_logs(course, tmp)
logs = pipeline.load_logs(paths[synth.ANSWER_LOG], paths[synth.LOGIN_LOG])
tables = ingest.load_tables_dir(tmp, require_lms=True, local_offset_seconds=logs.offset_seconds)

timelines = sessions.user_timelines(logs.answers, logs.logins)
result = calibration.calibrate(timelines, tables.lms_hours)

# %%
# The sweep: slope per grid point.
for row in result.sweep[::4]:
    slope = "  n/a" if row.slope is None else f"{row.slope:.3f}"
    print(f"theta {row.theta:4.2f} h  slope {slope}  mean total {row.mean_total_hours:6.2f} h")

fit = result.fit_at_star
lo, hi = fit.slope_ci95
print(f"\nselected theta: {result.theta_star} h")
print(f"slope {fit.slope:.3f}  95% CI [{lo:.3f}, {hi:.3f}]  r {fit.pearson_r:.3f}  n {fit.n_used}")

# %%
# The outlier filter should flag exactly the planted direct-access students.
planted = {u for u, t in course.truth.users.items() if t.direct_access}
print("removed:", len(result.removed), "planted:", len(planted),
      "match:", set(result.removed) == planted)
