"""Ground-truth matching, F1, relative path length and Welch's t."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

EVAL_RADIUS = 0.35


class DegenerateStatistic(ValueError):
    """A statistic is undefined for the given samples (for example zero variance)."""


@dataclass
class MatchResult:
    tp: int
    fp: int
    fn: int
    pairs: list[tuple[int, int]] = field(default_factory=list)

    @property
    def degenerate(self) -> bool:
        return self.tp + self.fp + self.fn == 0

    @property
    def f1(self) -> float:
        return f1(self)


def _as_xy_class(items) -> tuple[np.ndarray, np.ndarray]:
    locs = np.array([tuple(it.location) for it in items], dtype=float).reshape(-1, 2)
    classes = np.array([it.class_label for it in items], dtype=int)
    return locs, classes


def match_ground_truth(accepted: Sequence, truth: Sequence, radius: float = EVAL_RADIUS) -> MatchResult:
    """Greedy nearest-first one-to-one matching.

    Both inputs only need ``location`` and ``class_label`` attributes. A pair
    may match when the distance is strictly below ``radius`` and the classes
    agree; candidate pairs are taken in order of increasing distance (ties by
    index). ``pairs`` holds ``(accepted_index, truth_index)``.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    pred_xy, pred_cls = _as_xy_class(accepted)
    true_xy, true_cls = _as_xy_class(truth)
    pairs: list[tuple[int, int]] = []
    if len(pred_xy) and len(true_xy):
        d = np.hypot(pred_xy[:, None, 0] - true_xy[None, :, 0], pred_xy[:, None, 1] - true_xy[None, :, 1])
        ok = (d < radius) & (pred_cls[:, None] == true_cls[None, :])
        pi, ti = np.nonzero(ok)
        order = np.lexsort((ti, pi, d[pi, ti]))
        used_p, used_t = set(), set()
        for k in order:
            p, t = int(pi[k]), int(ti[k])
            if p in used_p or t in used_t:
                continue
            used_p.add(p)
            used_t.add(t)
            pairs.append((p, t))
    tp = len(pairs)
    return MatchResult(tp=tp, fp=len(pred_xy) - tp, fn=len(true_xy) - tp, pairs=pairs)


def f1(m: MatchResult) -> float:
    """``2tp / (2tp + fp + fn)``; NaN when all counts are zero (degenerate)."""
    denom = 2 * m.tp + m.fp + m.fn
    if denom == 0:
        return math.nan
    return 2 * m.tp / denom


def relative_length(length: float, baseline_length: float) -> float:
    """Path length relative to the 12 m coverage baseline on the same field."""
    if not baseline_length > 0:
        raise ValueError("baseline length must be positive")
    return length / baseline_length


def welch_t(tp_scores: Sequence[float], fp_scores: Sequence[float]) -> float:
    """Welch's unequal-variance t statistic of ``tp_scores`` against ``fp_scores``.

    Raises:
        ValueError: when either sample has fewer than two values.
        DegenerateStatistic: when both samples have zero variance.
    """
    a = np.asarray(tp_scores, dtype=float)
    b = np.asarray(fp_scores, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each sample needs at least two values")
    se2 = a.var(ddof=1) / len(a) + b.var(ddof=1) / len(b)
    if se2 <= 0.0:
        raise DegenerateStatistic("zero variance in both samples")
    return float((a.mean() - b.mean()) / math.sqrt(se2))
