"""Experiment harness: certainty separability, parameter sweep, localization
robustness and object density.

Every experiment expands into a flat list of independent tasks, runs them
(optionally on a process pool) and returns tidy rows in task order, so the
output is identical for any number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from ..coverage import FieldPolygon, path_length, plan_coverage
from ..detect import (
    CERTAINTY_MEASURES,
    DetectorProfile,
    build_detection_set,
    certainty_measures,
    synthetic_detect,
)
from ..geo import CameraModel, Pose, field_of_view, pixels_to_world
from ..inspection import PlannerParams
from ..sim.errors import LEVEL_NAMES
from ..sim.mission import run_mission, stream
from ..sim.worlds import generate_clustered, generate_uniform
from .metrics import EVAL_RADIUS, DegenerateStatistic, f1, match_ground_truth, relative_length, welch_t

DISTRIBUTIONS = ("clustered", "uniform")
BASELINE_ALTITUDE = 12.0
_WORLD = 7

GENERATORS = {"clustered": generate_clustered, "uniform": generate_uniform}

ROW_FIELDS = (
    "experiment",
    "distribution",
    "planner",
    "h_cov",
    "c_accept",
    "c_reject",
    "level",
    "n_objects",
    "density",
    "seed",
    "tp",
    "fp",
    "fn",
    "f1",
    "coverage_length",
    "inspection_length",
    "total_length",
    "r_diff",
    "warnings",
)


@dataclass(frozen=True)
class SweepGrid:
    h_cov: tuple[float, ...] = (12.0, 24.0, 36.0, 48.0)
    c_accept: tuple[float, ...] = (1.0, 0.8, 0.6, 0.4)
    c_reject: tuple[float, ...] = (0.05, 0.2, 0.4)
    excluded: tuple[tuple[float, float], ...] = ((0.4, 0.4),)

    def cells(self) -> list[tuple[float, float, float]]:
        """``(h_cov, c_accept, c_reject)`` in grid order, exclusions removed."""
        return [
            (h, a, r)
            for h in self.h_cov
            for a in self.c_accept
            for r in self.c_reject
            if (a, r) not in self.excluded and r <= a
        ]


@dataclass(frozen=True)
class Scenario:
    """Everything a mission needs besides the planner parameters and seed."""

    field: FieldPolygon
    camera: CameraModel
    profile: DetectorProfile
    n_objects: int = 60
    params: PlannerParams = field(default_factory=PlannerParams)

    @property
    def baseline_length(self) -> float:
        return path_length(plan_coverage(self.field, self.camera, BASELINE_ALTITUDE, self.params.overlap_fraction))

    @property
    def area_ha(self) -> float:
        return self.field.area / 10_000.0


def make_world(distribution: str, field: FieldPolygon, n: int, seed: int):
    """Ground truth for one seed; independent of every planner setting."""
    try:
        generator = GENERATORS[distribution]
    except KeyError:
        raise ValueError(f"unknown distribution {distribution!r}") from None
    return generator(field, n, stream(seed, _WORLD, n))


@dataclass(frozen=True)
class Task:
    experiment: str
    distribution: str
    planner: str
    params: PlannerParams
    level: str
    n_objects: int
    seed: int


def run_task(scenario: Scenario, task: Task) -> dict:
    """One mission, summarized as a tidy row."""
    world = make_world(task.distribution, scenario.field, task.n_objects, task.seed)
    result = run_mission(
        scenario.field,
        world,
        task.params,
        scenario.camera,
        scenario.profile,
        task.level,
        task.seed,
        inspect=task.planner == "adaptive",
    )
    match = result.evaluate(world)
    adaptive = task.planner == "adaptive"
    return {
        "experiment": task.experiment,
        "distribution": task.distribution,
        "planner": task.planner,
        "h_cov": task.params.h_cov,
        "c_accept": task.params.c_accept if adaptive else None,
        "c_reject": task.params.c_reject,
        "level": task.level,
        "n_objects": task.n_objects,
        "density": task.n_objects / scenario.area_ha,
        "seed": task.seed,
        "tp": match.tp,
        "fp": match.fp,
        "fn": match.fn,
        "f1": f1(match),
        "coverage_length": result.coverage_length,
        "inspection_length": result.inspection_length,
        "total_length": result.total_length,
        "r_diff": relative_length(result.total_length, scenario.baseline_length),
        "warnings": "; ".join(result.warnings),
    }


class TaskFailure(RuntimeError):
    def __init__(self, task: Task, error: BaseException):
        super().__init__(f"{task}: {error!r}")
        self.task = task
        self.error = error


def _safe_run(args):
    scenario, task = args
    try:
        return run_task(scenario, task)
    except Exception as exc:  # reported through the failure manifest
        return TaskFailure(task, exc)


def run_tasks(
    scenario: Scenario,
    tasks: Sequence[Task],
    jobs: int = 1,
    progress: Optional[Callable[[int, int], None]] = None,
) -> tuple[list[dict], list[TaskFailure]]:
    """Run ``tasks`` and return rows in task order plus any failures."""
    rows: list[dict] = []
    failures: list[TaskFailure] = []
    work = [(scenario, t) for t in tasks]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(_safe_run, work, chunksize=max(1, len(work) // (4 * jobs)))
            outcomes = list(results)
    else:
        outcomes = []
        for k, item in enumerate(work):
            outcomes.append(_safe_run(item))
            if progress:
                progress(k + 1, len(work))
    for out in outcomes:
        (failures if isinstance(out, TaskFailure) else rows).append(out)
    return rows, failures


# -- experiment task lists ---------------------------------------------------


def sweep_tasks(
    scenario: Scenario,
    grid: SweepGrid,
    seeds: Iterable[int],
    distributions: Sequence[str] = DISTRIBUTIONS,
    level: str = "perfect",
) -> list[Task]:
    seeds = list(seeds)
    base = scenario.params
    tasks = []
    for dist in distributions:
        for h in grid.h_cov:
            params = replace(base, h_cov=h, c_accept=1.0, c_reject=min(base.c_reject, 1.0))
            tasks += [Task("sweep", dist, "coverage", params, level, scenario.n_objects, s) for s in seeds]
        for h, a, r in grid.cells():
            params = replace(base, h_cov=h, c_accept=a, c_reject=r)
            tasks += [Task("sweep", dist, "adaptive", params, level, scenario.n_objects, s) for s in seeds]
    return tasks


def localization_tasks(
    scenario: Scenario,
    best: dict[str, PlannerParams],
    seeds: Iterable[int],
    levels: Sequence[str] = LEVEL_NAMES,
    altitudes: Sequence[float] = (12.0, 24.0, 36.0, 48.0),
) -> list[Task]:
    seeds = list(seeds)
    tasks = []
    for dist, params in best.items():
        for level in levels:
            for h in altitudes:
                for planner in ("adaptive", "coverage"):
                    p = replace(params, h_cov=h)
                    tasks += [Task("localization", dist, planner, p, level, scenario.n_objects, s) for s in seeds]
    return tasks


def density_tasks(
    scenario: Scenario,
    best: dict[str, PlannerParams],
    seeds: Iterable[int],
    counts: Sequence[int] = tuple(range(0, 201, 20)),
) -> list[Task]:
    seeds = list(seeds)
    tasks = []
    for dist, params in best.items():
        for n in counts:
            for planner, p in (("adaptive", params), ("coverage", replace(params, h_cov=BASELINE_ALTITUDE))):
                tasks += [Task("density", dist, planner, p, "perfect", n, s) for s in seeds]
    return tasks


# -- aggregation ---------------------------------------------------------------


def _mean_sd(values: list[float]) -> tuple[float, float, int]:
    vals = [v for v in values if v is not None and not math.isnan(v)]
    if not vals:
        return math.nan, math.nan, 0
    arr = np.array(vals, dtype=float)
    sd = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return float(arr.mean()), sd, len(arr)


def aggregate(rows: Sequence[dict], keys: Sequence[str]) -> list[dict]:
    """Mean and standard deviation of F1 and r_diff per group.

    Degenerate F1 values (NaN) are left out of the F1 statistics. Groups keep
    the order of first appearance.
    """
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in keys), []).append(row)
    out = []
    for key, members in groups.items():
        f_mean, f_sd, f_n = _mean_sd([m["f1"] for m in members])
        r_mean, r_sd, _ = _mean_sd([m["r_diff"] for m in members])
        agg = dict(zip(keys, key))
        agg.update(
            f1_mean=f_mean,
            f1_sd=f_sd,
            r_diff_mean=r_mean,
            r_diff_sd=r_sd,
            runs=len(members),
            degenerate=len(members) - f_n,
        )
        out.append(agg)
    return out


SWEEP_KEYS = ("distribution", "planner", "h_cov", "c_accept", "c_reject")


def best_cell(summary: Sequence[dict], distribution: str, weight: float = 0.5) -> dict:
    """Adaptive cell maximizing ``F1 - weight * r_diff``; earlier cells win ties."""
    best, score = None, -math.inf
    for row in summary:
        if row["distribution"] != distribution or row["planner"] != "adaptive":
            continue
        s = row["f1_mean"] - weight * row["r_diff_mean"]
        if s > score + 1e-12:
            best, score = row, s
    if best is None:
        raise ValueError(f"no adaptive cells for {distribution!r}")
    return dict(best, score=score)


def best_params(summary: Sequence[dict], base: PlannerParams, weight: float = 0.5) -> dict[str, PlannerParams]:
    out = {}
    for dist in dict.fromkeys(r["distribution"] for r in summary):
        cell = best_cell(summary, dist, weight)
        out[dist] = replace(base, h_cov=cell["h_cov"], c_accept=cell["c_accept"], c_reject=cell["c_reject"])
    return out


def crossover_density(points: Sequence[tuple[float, float]], level: float = 1.0) -> float:
    """First density where the mean relative length reaches ``level``.

    ``points`` are ``(density, r_diff)`` pairs; linear interpolation between
    neighbours. Returns ``inf`` when the curve stays below ``level``.
    """
    pts = sorted(points)
    if pts and pts[0][1] >= level:
        return pts[0][0]
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if y1 >= level:
            return x0 + (level - y0) * (x1 - x0) / (y1 - y0)
    return math.inf


def density_curves(rows: Sequence[dict]) -> dict[tuple[str, str], list[tuple[float, float]]]:
    """``(distribution, planner) -> [(density, mean r_diff), ...]``."""
    summary = aggregate(rows, ("distribution", "planner", "density"))
    curves: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for row in summary:
        curves.setdefault((row["distribution"], row["planner"]), []).append((row["density"], row["r_diff_mean"]))
    return curves


# -- experiment 1: certainty separability -------------------------------------


def certainty_samples(
    profile: DetectorProfile,
    altitude: float,
    n_images: int,
    seed: int = 0,
    camera: Optional[CameraModel] = None,
    density: float = 80.0,
    border: float = 0.35,
) -> tuple[dict[str, list[float]], dict[str, list[float]]]:
    """Certainty values of true and false positive detections at ``altitude``.

    Detections closer than ``border`` meters to the image edge are skipped,
    since their ground-truth object may lie outside the image.
    """
    camera = camera or CameraModel()
    fov_w, fov_h = field_of_view(camera, altitude)
    gsd = fov_w / camera.image_width
    margin = border / gsd
    area_ha = fov_w * fov_h / 10_000.0
    tp = {m: [] for m in CERTAINTY_MEASURES}
    fp = {m: [] for m in CERTAINTY_MEASURES}
    for k in range(n_images):
        rng = stream(seed, int(round(altitude * 1000)), k)
        pose = Pose(0.0, 0.0, altitude, rng.uniform(0.0, 2 * np.pi))
        n = rng.poisson(density * area_ha)
        px = rng.random((n, 2)) * (camera.image_width, camera.image_height)
        locs = pixels_to_world(px, pose, camera) if n else np.zeros((0, 2))
        classes = rng.integers(0, profile.class_count, n)
        image = synthetic_detect((locs, classes), pose, camera, profile, rng, mc_runs=None)
        keep = [
            i
            for i, d in enumerate(image.references)
            if margin <= d.center[0] <= camera.image_width - margin
            and margin <= d.center[1] <= camera.image_height - margin
        ]
        if not keep:
            continue
        centers = pixels_to_world(np.array([image.references[i].center for i in keep]), pose, camera)
        preds = [_Point(tuple(c), image.references[i].class_label) for c, i in zip(centers, keep)]
        truth = [_Point(tuple(l), int(c)) for l, c in zip(locs, classes)]
        match = match_ground_truth(preds, truth, EVAL_RADIUS)
        matched = {p for p, _ in match.pairs}
        for j, i in enumerate(keep):
            vector = certainty_measures(build_detection_set(image.references[i], image.mc_runs), profile.class_count)
            target = tp if j in matched else fp
            for name, value in vector.as_dict().items():
                target[name].append(value)
    return tp, fp


@dataclass(frozen=True)
class _Point:
    location: tuple
    class_label: int


def experiment_certainty_separability(
    profile: DetectorProfile,
    altitudes: Sequence[float] = (12.0, 24.0, 32.0),
    n_images: int = 500,
    seed: int = 0,
    camera: Optional[CameraModel] = None,
) -> list[dict]:
    """Welch's t of TP against FP certainty, per measure and altitude.

    ``t`` is NaN when the statistic is degenerate (too few samples or zero
    variance); the sample sizes are reported alongside.
    """
    rows = []
    for h in altitudes:
        tp, fp = certainty_samples(profile, h, n_images, seed, camera)
        for name in CERTAINTY_MEASURES:
            try:
                t = welch_t(tp[name], fp[name])
            except (DegenerateStatistic, ValueError):
                t = math.nan
            rows.append(
                {
                    "experiment": "certainty",
                    "altitude": h,
                    "measure": name,
                    "t": t,
                    "n_tp": len(tp[name]),
                    "n_fp": len(fp[name]),
                    "tp_mean": float(np.mean(tp[name])) if tp[name] else math.nan,
                    "fp_mean": float(np.mean(fp[name])) if fp[name] else math.nan,
                }
            )
    return rows
