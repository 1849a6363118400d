"""Detector abstraction, synthetic detector and Monte-Carlo certainty measures."""

from .certainty import (
    CERTAINTY_MEASURES,
    CertaintyVector,
    Detection,
    DetectionSet,
    build_detection_set,
    certainty_measures,
    confidence_threshold_filter,
    iou,
)
from .profile import AltitudeAnchor, DetectorProfile, default_profile, noiseless_profile
from .synthetic import SyntheticImage, synthetic_detect

__all__ = [
    "AltitudeAnchor",
    "CERTAINTY_MEASURES",
    "CertaintyVector",
    "Detection",
    "DetectionSet",
    "DetectorProfile",
    "SyntheticImage",
    "build_detection_set",
    "certainty_measures",
    "confidence_threshold_filter",
    "default_profile",
    "iou",
    "noiseless_profile",
    "synthetic_detect",
]
