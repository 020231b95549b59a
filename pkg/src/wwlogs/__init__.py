"""Homework-behaviour metrics mined from WeBWorK answer and login logs."""

from .calibration import (
    FitResult,
    PairedSample,
    calibrate,
    filter_outliers,
    ols_fit,
    pearson,
    select_threshold,
    sweep_thresholds,
)
from .cohort import compare_table, cohens_d, describe, histogram, split_groups
from .ingest import (
    AnswerEvent,
    CourseTables,
    LoginEvent,
    format_answer_line,
    format_login_line,
    infer_utc_offset,
    load_course_tables,
    parse_answer_line,
    parse_login_line,
    read_answer_log,
    read_login_log,
    reconcile_logins,
)
from .metrics import (
    assignment_metrics,
    assignment_summaries,
    difficulty_ratings,
    problem_outcomes,
    student_aggregates,
)
from .pipeline import analyze, load_logs
from .sessions import (
    WHOLE_COURSE,
    ActivitySession,
    EventStream,
    build_event_stream,
    course_total_time,
    sessionize,
    time_on_task,
)
from .synth import GeneratorParams, generate_course, write_logs

__version__ = "0.1.0"
