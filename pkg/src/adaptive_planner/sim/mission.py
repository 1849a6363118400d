"""Offline mission execution: coverage, detection, mapping and inspection."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..coverage import FieldPolygon, FlightPath, Waypoint, path_length, plan_coverage
from ..detect import DetectorProfile, build_detection_set, certainty_measures, synthetic_detect
from ..evaluation.metrics import EVAL_RADIUS, MatchResult, f1, match_ground_truth
from ..geo import CameraModel, GeoPoint, Pose, effective_nadir_pose, field_of_view, pixels_to_world
from ..inspection import PlannerParams, plan_inspection
from ..mapping import MapObject, ObjectMap, Observation
from .errors import LEVELS, LocalizationErrorLevel, perturb_pose
from .worlds import WorldObject, world_arrays

COVERAGE, INSPECTION, ROUTING = 0, 1, 2
_DETECT, _POSE = 0, 1


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent random stream identified by ``(seed, *key)``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


@dataclass
class ImageRecord:
    stage: str
    index: int
    true_pose: Pose
    reported_pose: Pose
    detections: list[tuple[float, float, int, float]]
    map_size: int


@dataclass
class MissionResult:
    planner: str
    params: PlannerParams
    level: str
    seed: int
    coverage_path: FlightPath
    inspection_path: FlightPath
    final_map: list[MapObject]
    images: list[ImageRecord] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def coverage_length(self) -> float:
        return path_length(self.coverage_path) if self.coverage_path.waypoints else 0.0

    @property
    def inspection_length(self) -> float:
        return path_length(self.inspection_path) if self.inspection_path.waypoints else 0.0

    @property
    def total_length(self) -> float:
        return self.coverage_length + self.inspection_length

    def accepted(self, c_eval: Optional[float] = None) -> list[MapObject]:
        threshold = self.params.c_eval if c_eval is None else c_eval
        return [o for o in self.final_map if o.certainty > threshold]

    def evaluate(self, truth: list[WorldObject], radius: float = EVAL_RADIUS) -> MatchResult:
        return match_ground_truth(self.accepted(), truth, radius)

    def f1(self, truth: list[WorldObject]) -> float:
        return f1(self.evaluate(truth))


class _Executor:
    def __init__(self, world, params, camera, profile, level, seed):
        self.locs, self.classes = world_arrays(world)
        self.params = params
        self.camera = camera
        self.profile = profile
        self.level = level
        self.seed = seed
        self.d_dist = level.mapping_d_dist
        self.map = ObjectMap(cell_size=self.d_dist)
        self.images: list[ImageRecord] = []
        self.extrapolated = False
        self.mc = params.certainty_measure != "yolo"

    def fly(self, path: FlightPath, stage: int):
        name = "coverage" if stage == COVERAGE else "inspection"
        for k, wp in enumerate(path.waypoints):
            self.capture(name, stage, k, wp)

    def capture(self, name: str, stage: int, k: int, wp: Waypoint):
        params, camera = self.params, self.camera
        nominal = Pose(wp.position[0], wp.position[1], wp.altitude, wp.heading)
        noisy = perturb_pose(nominal, self.level, stream(self.seed, stage, k, _POSE))
        # position/altitude/heading errors live in the report; the gimbal tilt
        # is real but reported as nadir
        actual = replace(nominal, gimbal_roll=noisy.gimbal_roll, gimbal_pitch=noisy.gimbal_pitch)
        reported = replace(noisy, gimbal_roll=0.0, gimbal_pitch=0.0)
        view = effective_nadir_pose(actual)

        fov_w, fov_h = field_of_view(camera, view.altitude)
        reach2 = (fov_w**2 + fov_h**2) / 4.0 + 1e-6
        if len(self.locs):
            near = ((self.locs[:, 0] - view.easting) ** 2 + (self.locs[:, 1] - view.northing) ** 2) <= reach2
            objects = (self.locs[near], self.classes[near])
        else:
            objects = (self.locs, self.classes)
        rng = stream(self.seed, stage, k, _DETECT)
        image = self._detect(objects, view, rng)
        self.extrapolated |= image.extrapolated

        kept = [i for i, d in enumerate(image.references) if d.confidence >= params.c_reject]
        if kept:
            centers = np.array([image.references[i].center for i in kept])
            geo = pixels_to_world(centers, reported, camera)
        else:
            geo = np.zeros((0, 2))
        records = []
        for row, i in enumerate(kept):
            det = image.references[i]
            certainty = self._certainty(image, i)
            loc = GeoPoint(float(geo[row, 0]), float(geo[row, 1]))
            self.map.insert_or_merge(Observation(loc, det.class_label, certainty, wp.altitude), self.d_dist)
            records.append((loc.easting, loc.northing, det.class_label, certainty))
        self.map.prune_missed(
            reported, camera, geo, params.c_accept, self.d_dist, params.visibility_margin, altitude=wp.altitude
        )
        self.images.append(ImageRecord(name, k, actual, reported, records, len(self.map)))

    def _detect(self, objects, view, rng):
        return synthetic_detect(objects, view, self.camera, self.profile, rng, mc_runs=None if self.mc else 0)

    def _certainty(self, image, i) -> float:
        det = image.references[i]
        if not self.mc:
            return det.confidence
        vector = certainty_measures(build_detection_set(det, image.mc_runs), self.profile.class_count)
        value = vector.as_dict()[self.params.certainty_measure]
        return min(max(value, 0.0), 1.0)


def run_mission(
    field: FieldPolygon,
    world: list[WorldObject],
    params: PlannerParams,
    camera: CameraModel,
    profile: DetectorProfile,
    level: LocalizationErrorLevel | str = "perfect",
    seed: int = 0,
    *,
    inspect: bool = True,
    coverage_path: Optional[FlightPath] = None,
) -> MissionResult:
    """Fly the adaptive mission (or only its coverage stage when ``inspect`` is False).

    Every stochastic draw comes from a stream keyed by ``seed`` and the image
    (stage, waypoint index), so runs are bit-reproducible and runs that share
    a seed see the same detector noise on the same images.
    """
    if isinstance(level, str):
        level = LEVELS[level]
    if coverage_path is None:
        coverage_path = plan_coverage(field, camera, params.h_cov, params.overlap_fraction)
    ex = _Executor(world, params, camera, profile, level, seed)
    ex.fly(coverage_path, COVERAGE)

    last = coverage_path.waypoints[-1].position
    if inspect:
        inspection_path = plan_inspection(ex.map, params, camera, last, stream(seed, ROUTING))
        ex.fly(inspection_path, INSPECTION)
    else:
        inspection_path = FlightPath([], kind="inspection", start=last)

    warnings = []
    if ex.extrapolated:
        warnings.append("detector profile extrapolated outside its calibrated altitude range")
    return MissionResult(
        planner="adaptive" if inspect else "coverage",
        params=params,
        level=level.name,
        seed=seed,
        coverage_path=coverage_path,
        inspection_path=inspection_path,
        final_map=ex.map.objects,
        images=ex.images,
        warnings=warnings,
    )


def run_baseline(
    field: FieldPolygon,
    world: list[WorldObject],
    params: PlannerParams,
    camera: CameraModel,
    profile: DetectorProfile,
    level: LocalizationErrorLevel | str = "perfect",
    seed: int = 0,
    *,
    coverage_path: Optional[FlightPath] = None,
) -> MissionResult:
    """Fixed-altitude coverage flight at ``params.h_cov`` without inspections."""
    return run_mission(field, world, params, camera, profile, level, seed, inspect=False, coverage_path=coverage_path)
