"""Offline world: object layouts, localization errors and mission execution."""

from .errors import LEVEL_NAMES, LEVELS, LocalizationErrorLevel, get_level, perturb_pose
from .mission import ImageRecord, MissionResult, run_baseline, run_mission, stream
from .worlds import (
    CLASS_NAMES,
    PlacementError,
    WorldObject,
    cluster_covariance,
    cluster_sizes,
    generate_clustered,
    generate_uniform,
    world_arrays,
)
