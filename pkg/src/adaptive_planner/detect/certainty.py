"""Detections, Monte-Carlo detection sets and the certainty measures computed on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

BBox = tuple[float, float, float, float]

# a member must overlap its reference by strictly more than this
MATCH_IOU = 0.5


@dataclass(frozen=True)
class Detection:
    """One image-space detection.

    ``bbox`` is ``(u_min, v_min, u_max, v_max)`` in pixels, ``class_scores``
    holds the raw per-class activations and ``confidence`` the detector score
    of the best class.
    """

    bbox: BBox
    class_scores: tuple[float, ...]
    confidence: float
    class_label: int

    def __post_init__(self):
        u0, v0, u1, v1 = self.bbox
        if not (u0 < u1 and v0 < v1):
            raise ValueError(f"invalid bbox {self.bbox}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    @property
    def center(self) -> tuple[float, float]:
        u0, v0, u1, v1 = self.bbox
        return (u0 + u1) / 2.0, (v0 + v1) / 2.0


@dataclass
class DetectionSet:
    reference: Detection
    members: list[Detection] = field(default_factory=list)
    n_runs: int = 20
    ious: list[float] = field(default_factory=list)

    def __post_init__(self):
        if len(self.members) > self.n_runs:
            raise ValueError("more members than Monte-Carlo runs")
        if not self.ious:
            self.ious = [iou(self.reference.bbox, m.bbox) for m in self.members]


@dataclass(frozen=True)
class CertaintyVector:
    yolo: float
    avg_yolo: float
    occurrence: float
    location: float
    class_certainty: float
    combined: float

    def as_dict(self) -> dict[str, float]:
        return {
            "yolo": self.yolo,
            "avg_yolo": self.avg_yolo,
            "occurrence": self.occurrence,
            "location": self.location,
            "class": self.class_certainty,
            "combined": self.combined,
        }


CERTAINTY_MEASURES = ("yolo", "avg_yolo", "occurrence", "location", "class", "combined")


def iou(a: Sequence[float], b: Sequence[float]) -> float:
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return inter / union


def build_detection_set(reference: Detection, mc_runs: Sequence[Sequence[Detection]]) -> DetectionSet:
    """Collect, per Monte-Carlo run, the detection best overlapping ``reference``.

    Matching uses boxes only; class labels play no role.
    """
    if len(mc_runs) < 1:
        raise ValueError("need at least one Monte-Carlo run")
    members, ious = [], []
    for run in mc_runs:
        best, best_iou = None, MATCH_IOU
        for det in run:
            value = iou(reference.bbox, det.bbox)
            if value > best_iou:
                best, best_iou = det, value
        if best is not None:
            members.append(best)
            ious.append(best_iou)
    return DetectionSet(reference, members, len(mc_runs), ious)


def softmax(values: Sequence[float]) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    e = np.exp(x - x.max())
    return e / e.sum()


def certainty_measures(dset: DetectionSet, class_count: int) -> CertaintyVector:
    """All certainty measures of one detection set.

    The class certainty sums ``-P ln P`` over the members per class (no
    division by the set size), pushes the per-class sums through a softmax and
    takes the maximum.
    """
    if class_count < 1:
        raise ValueError("class_count must be >= 1")
    members = dset.members
    occurrence = len(members) / dset.n_runs
    if members:
        avg_yolo = math.fsum(m.confidence for m in members) / len(members)
        location = math.fsum(dset.ious) / len(members)
    else:
        avg_yolo = 0.0
        location = 0.0

    entropy = np.zeros(class_count)
    for m in members:
        if len(m.class_scores) != class_count:
            raise ValueError(f"detection has {len(m.class_scores)} class scores, expected {class_count}")
        p = softmax(m.class_scores)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(p > 0.0, p * np.log(p), 0.0)
        entropy -= terms
    class_certainty = float(softmax(entropy).max())

    return CertaintyVector(
        yolo=dset.reference.confidence,
        avg_yolo=avg_yolo,
        occurrence=occurrence,
        location=location,
        class_certainty=class_certainty,
        combined=occurrence * location * class_certainty,
    )


def confidence_threshold_filter(detections: Sequence[Detection], c_reject: float) -> list[Detection]:
    """Keep detections with ``confidence >= c_reject``."""
    if not 0.0 <= c_reject <= 1.0:
        raise ValueError(f"c_reject must be in [0, 1], got {c_reject}")
    return [d for d in detections if d.confidence >= c_reject]
