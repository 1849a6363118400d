"""Localization error levels and pose perturbation."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..geo import Pose


@dataclass(frozen=True)
class LocalizationErrorLevel:
    """Maximum absolute errors; each component is drawn from U(-max, +max).

    Angles in radians. ``mapping_d_dist`` is the merge radius used by the
    map at this level.
    """

    name: str
    max_position_err: float = 0.0
    max_altitude_err: float = 0.0
    max_roll_err: float = 0.0
    max_pitch_err: float = 0.0
    max_heading_err: float = 0.0
    mapping_d_dist: float = 0.35

    def __post_init__(self):
        for value in (
            self.max_position_err,
            self.max_altitude_err,
            self.max_roll_err,
            self.max_pitch_err,
            self.max_heading_err,
        ):
            if value < 0:
                raise ValueError("error maxima must be non-negative")
        if self.mapping_d_dist <= 0:
            raise ValueError("mapping_d_dist must be positive")

    @property
    def is_perfect(self) -> bool:
        return not any(
            (self.max_position_err, self.max_altitude_err, self.max_roll_err, self.max_pitch_err, self.max_heading_err)
        )

    @classmethod
    def from_degrees(cls, name, position, altitude, roll_deg, pitch_deg, heading_deg, d_dist):
        return cls(
            name,
            position,
            altitude,
            math.radians(roll_deg),
            math.radians(pitch_deg),
            math.radians(heading_deg),
            d_dist,
        )


LEVEL_NAMES = ("perfect", "good", "decent", "poor", "very_poor")

LEVELS: dict[str, LocalizationErrorLevel] = {
    "perfect": LocalizationErrorLevel.from_degrees("perfect", 0.0, 0.0, 0.0, 0.0, 0.0, 0.35),
    "good": LocalizationErrorLevel.from_degrees("good", 0.015, 0.015, 0.5, 0.5, 0.5, 0.5),
    "decent": LocalizationErrorLevel.from_degrees("decent", 0.03, 0.03, 1.0, 1.0, 1.0, 0.9),
    "poor": LocalizationErrorLevel.from_degrees("poor", 0.06, 0.06, 2.0, 2.0, 2.0, 1.8),
    "very_poor": LocalizationErrorLevel.from_degrees("very_poor", 0.15, 0.15, 5.0, 5.0, 5.0, 4.7),
}


def get_level(name: str) -> LocalizationErrorLevel:
    try:
        return LEVELS[name]
    except KeyError:
        raise ValueError(f"unknown localization level {name!r}; choose from {', '.join(LEVEL_NAMES)}") from None


def perturb_pose(true_pose: Pose, level: LocalizationErrorLevel, rng: np.random.Generator) -> Pose:
    """Pose as reported by the UAV: the true pose plus one uniform error per component.

    Draw order is fixed (easting, northing, altitude, heading, roll, pitch) so
    streams stay aligned across levels.
    """
    u = rng.uniform(-1.0, 1.0, 6)
    if level.is_perfect:
        return true_pose
    altitude = true_pose.altitude + u[2] * level.max_altitude_err
    return replace(
        true_pose,
        easting=true_pose.easting + u[0] * level.max_position_err,
        northing=true_pose.northing + u[1] * level.max_position_err,
        altitude=max(altitude, 1e-3),
        heading=true_pose.heading + u[3] * level.max_heading_err,
        gimbal_roll=true_pose.gimbal_roll + u[4] * level.max_roll_err,
        gimbal_pitch=true_pose.gimbal_pitch + u[5] * level.max_pitch_err,
    )
