"""Accept/reject/inspect decisions and low-altitude inspection route planning."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .coverage import FlightPath, Waypoint
from .geo import CameraModel, GeoPoint, Pose, heading_towards, is_visible
from .mapping import ObjectMap

IMPROVEMENT_EPS = 1e-10


class Decision(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    INSPECT = "inspect"


@dataclass(frozen=True)
class PlannerParams:
    h_cov: float = 48.0
    h_inspect: float = 12.0
    c_accept: float = 0.8
    c_reject: float = 0.05
    c_eval: float = 0.5
    d_dist: float = 0.35
    overlap_fraction: float = 0.10
    visibility_margin: float = 0.35
    certainty_measure: str = "yolo"
    restarts: int = 8
    max_evaluations: int = 200_000

    def __post_init__(self):
        for name in ("c_accept", "c_reject", "c_eval"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.c_reject > self.c_accept:
            raise ValueError("c_reject must not exceed c_accept")
        if not (self.h_cov > 0 and self.h_inspect > 0):
            raise ValueError("altitudes must be positive")
        if self.h_inspect > self.h_cov:
            raise ValueError("h_inspect must not exceed h_cov")
        if self.d_dist <= 0:
            raise ValueError("d_dist must be positive")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise ValueError("overlap_fraction must be in [0, 1)")


def decide(certainty: float, params: PlannerParams) -> Decision:
    if certainty > params.c_accept:
        return Decision.ACCEPT
    if certainty < params.c_reject:
        return Decision.REJECT
    return Decision.INSPECT


def _open_tour_length(dist: np.ndarray, tour: np.ndarray) -> float:
    return float(dist[tour[:-1], tour[1:]].sum())


def _local_search(dist: np.ndarray, tour: np.ndarray, max_evaluations: int) -> np.ndarray:
    """2-opt plus single-node relocation on an open tour.

    ``tour`` starts with the fixed start node and ends with a dummy node that
    is at distance 0 from everything, which turns the open tour into a path
    with both ends pinned.
    """
    tour = tour.copy()
    m = len(tour)
    evaluations = 0
    improved = True
    while improved and evaluations < max_evaluations:
        improved = False
        # 2-opt: reverse tour[i..j]
        for i in range(1, m - 2):
            j = np.arange(i + 1, m - 1)
            a, b = tour[i - 1], tour[i]
            c, d = tour[j], tour[j + 1]
            delta = dist[a, c] + dist[b, d] - dist[a, b] - dist[c, d]
            evaluations += len(j)
            k = int(np.argmin(delta))
            if delta[k] < -IMPROVEMENT_EPS:
                jj = j[k]
                tour[i : jj + 1] = tour[i : jj + 1][::-1].copy()
                improved = True
            if evaluations >= max_evaluations:
                break
        # relocation: move tour[i] between tour[k] and tour[k + 1]
        for i in range(1, m - 1):
            if evaluations >= max_evaluations:
                break
            x = tour[i]
            prev, nxt = tour[i - 1], tour[i + 1]
            gain = dist[prev, x] + dist[x, nxt] - dist[prev, nxt]
            rest = np.delete(tour, i)
            k = np.arange(0, len(rest) - 1)
            cost = dist[rest[k], x] + dist[x, rest[k + 1]] - dist[rest[k], rest[k + 1]]
            evaluations += len(k)
            best = int(np.argmin(cost))
            if cost[best] - gain < -IMPROVEMENT_EPS:
                tour = np.insert(rest, best + 1, x)
                improved = True
    return tour


def order_waypoints(
    points: Sequence[Sequence[float]],
    start: Sequence[float],
    rng: np.random.Generator,
    iterations: int = 8,
    max_evaluations: int = 200_000,
) -> list[int]:
    """Short open route from ``start`` through all ``points`` (end free).

    Multi-start local search: the given order plus ``iterations - 1`` random
    shuffles, each improved by 2-opt and relocation moves. The best route
    wins, earlier restarts on ties, so the result is never longer than the
    input order. Returns a permutation of ``range(len(points))``.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    n = len(points)
    if n <= 1:
        return list(range(n))
    coords = np.vstack((np.asarray(start, dtype=float).reshape(1, 2), np.asarray(points, dtype=float)))
    diff = coords[:, None, :] - coords[None, :, :]
    dist = np.zeros((n + 2, n + 2))
    dist[: n + 1, : n + 1] = np.hypot(diff[..., 0], diff[..., 1])
    dummy = n + 1

    best_tour, best_len = None, np.inf
    for r in range(iterations):
        inner = np.arange(1, n + 1)
        if r > 0:
            inner = rng.permutation(inner)
        tour = np.concatenate(([0], inner, [dummy]))
        tour = _local_search(dist, tour, max_evaluations)
        length = _open_tour_length(dist, tour)
        if length < best_len - IMPROVEMENT_EPS:
            best_tour, best_len = tour, length
    return [int(t) - 1 for t in best_tour[1:-1]]


def assign_headings(ordered: Sequence[Waypoint]) -> list[Waypoint]:
    """Point every waypoint at its successor; the last one keeps its predecessor's heading."""
    if len(ordered) == 0:
        raise ValueError("no waypoints")
    out: list[Waypoint] = []
    heading = 0.0
    for k, wp in enumerate(ordered):
        if k + 1 < len(ordered):
            heading = heading_towards(wp.position, ordered[k + 1].position, default=heading)
        out.append(replace(wp, heading=heading))
    return out


def filter_waypoints(
    ordered: Sequence[tuple[Waypoint, Sequence[float]]], camera: CameraModel, margin: float = 0.35
) -> list[Waypoint]:
    """Drop waypoints whose target is already in view of the last kept waypoint.

    Single forward pass: the first waypoint is kept; each following one is
    dropped if its target is visible (with ``margin``) from the most recently
    kept waypoint, otherwise it becomes the new reference.
    """
    kept: list[Waypoint] = []
    ref: Optional[Pose] = None
    for wp, target in ordered:
        if ref is not None and is_visible(target, ref, camera, margin):
            continue
        kept.append(wp)
        ref = Pose(wp.position[0], wp.position[1], wp.altitude, wp.heading)
    return kept


def inspection_targets(object_map: ObjectMap, params: PlannerParams):
    return [o for o in object_map if decide(o.certainty, params) is Decision.INSPECT]


def plan_inspection(
    object_map: ObjectMap,
    params: PlannerParams,
    camera: CameraModel,
    uav_position: Sequence[float],
    rng: np.random.Generator,
) -> FlightPath:
    """Inspection path over every mapped object whose decision is 'inspect'.

    The path starts (without capture) at ``uav_position``; each waypoint sits
    directly above its target at ``h_inspect``.
    """
    start = GeoPoint(float(uav_position[0]), float(uav_position[1]))
    targets = inspection_targets(object_map, params)
    if not targets:
        return FlightPath([], kind="inspection", start=start)
    points = [t.location for t in targets]
    order = order_waypoints(points, start, rng, params.restarts, params.max_evaluations)
    waypoints = [Waypoint(targets[i].location, params.h_inspect, 0.0, targets[i].id) for i in order]
    waypoints = assign_headings(waypoints)
    pairs = [(wp, targets[i].location) for wp, i in zip(waypoints, order)]
    kept = filter_waypoints(pairs, camera, params.visibility_margin)
    return FlightPath(kept, kind="inspection", start=start, metadata={"targets": len(targets)})
