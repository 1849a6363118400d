"""Metrics and experiment harness."""

from .metrics import (
    EVAL_RADIUS,
    DegenerateStatistic,
    MatchResult,
    f1,
    match_ground_truth,
    relative_length,
    welch_t,
)
