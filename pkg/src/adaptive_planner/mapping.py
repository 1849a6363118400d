"""Georeferenced object map built up during a mission."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .geo import CameraModel, GeoPoint, Pose, visible_mask

DEFAULT_D_DIST = 0.35
TIE_EPS = 1e-9


@dataclass(frozen=True)
class Observation:
    location: GeoPoint
    class_label: int
    certainty: float
    view_altitude: float

    def __post_init__(self):
        if not 0.0 <= self.certainty <= 1.0:
            raise ValueError(f"certainty {self.certainty} outside [0, 1]")
        if not self.view_altitude > 0:
            raise ValueError("view altitude must be positive")


@dataclass
class MapObject:
    id: int
    location: GeoPoint
    class_label: int
    certainty: float
    min_view_altitude: float
    max_certainty_seen: float
    observation_count: int = 1

    def absorb(self, location, class_label, certainty, view_altitude, max_certainty=None, count=1) -> bool:
        """Apply the merge rules; returns True when the stored location changed."""
        overwrite = view_altitude < self.min_view_altitude or certainty > self.certainty
        if overwrite:
            self.certainty = certainty
            self.class_label = class_label
            self.location = GeoPoint(*location)
        self.min_view_altitude = min(self.min_view_altitude, view_altitude)
        self.max_certainty_seen = max(self.max_certainty_seen, certainty if max_certainty is None else max_certainty)
        self.observation_count += count
        return overwrite


class ObjectMap:
    """Map of merged object hypotheses with a uniform-grid spatial index.

    Objects are kept in creation order. The grid cell size only affects speed.
    """

    def __init__(self, cell_size: float = DEFAULT_D_DIST):
        if cell_size <= 0:
            raise ValueError("cell size must be positive")
        self.cell_size = cell_size
        self._objects: dict[int, MapObject] = {}
        self._grid: dict[tuple[int, int], list[int]] = {}
        self._next_id = 0

    def __len__(self):
        return len(self._objects)

    def __iter__(self) -> Iterator[MapObject]:
        return iter(self._objects.values())

    @property
    def objects(self) -> list[MapObject]:
        return list(self._objects.values())

    def _cell(self, p) -> tuple[int, int]:
        return math.floor(p[0] / self.cell_size), math.floor(p[1] / self.cell_size)

    def _index(self, obj: MapObject):
        self._grid.setdefault(self._cell(obj.location), []).append(obj.id)

    def _unindex(self, obj: MapObject, location=None):
        cell = self._cell(obj.location if location is None else location)
        ids = self._grid[cell]
        ids.remove(obj.id)
        if not ids:
            del self._grid[cell]

    def nearest(self, point: Sequence[float], radius: float, exclude: Optional[int] = None) -> Optional[MapObject]:
        """Nearest object strictly closer than ``radius``; ties go to the oldest object."""
        reach = math.ceil(radius / self.cell_size)
        cx, cy = self._cell(point)
        best, best_d = None, radius
        for gx in range(cx - reach, cx + reach + 1):
            for gy in range(cy - reach, cy + reach + 1):
                for oid in self._grid.get((gx, gy), ()):
                    if oid == exclude:
                        continue
                    obj = self._objects[oid]
                    d = math.hypot(obj.location[0] - point[0], obj.location[1] - point[1])
                    if d >= radius:
                        continue
                    if best is None or d < best_d - TIE_EPS or (abs(d - best_d) <= TIE_EPS and oid < best.id):
                        best, best_d = obj, d
        return best

    def add(self, obs: Observation) -> MapObject:
        obj = MapObject(
            id=self._next_id,
            location=GeoPoint(*obs.location),
            class_label=obs.class_label,
            certainty=obs.certainty,
            min_view_altitude=obs.view_altitude,
            max_certainty_seen=obs.certainty,
        )
        self._next_id += 1
        self._objects[obj.id] = obj
        self._index(obj)
        return obj

    def remove(self, obj: MapObject):
        self._unindex(obj)
        del self._objects[obj.id]

    def insert_or_merge(self, obs: Observation, d_dist: float = DEFAULT_D_DIST) -> MapObject:
        """Merge ``obs`` into the nearest object closer than ``d_dist`` or add it.

        When a merge moves an object within ``d_dist`` of another one, the two
        are merged as well (same rules), so no two objects stay closer than
        ``d_dist``.
        """
        if d_dist <= 0:
            raise ValueError("d_dist must be positive")
        target = self.nearest(obs.location, d_dist)
        if target is None:
            return self.add(obs)
        old = target.location
        if target.absorb(obs.location, obs.class_label, obs.certainty, obs.view_altitude):
            self._unindex(target, old)
            self._index(target)
            self._settle(target, d_dist)
        return target

    def _settle(self, obj: MapObject, d_dist: float):
        while True:
            other = self.nearest(obj.location, d_dist, exclude=obj.id)
            if other is None:
                return
            keep, drop = (obj, other) if obj.id < other.id else (other, obj)
            self.remove(drop)
            old = keep.location
            keep.absorb(
                drop.location,
                drop.class_label,
                drop.certainty,
                drop.min_view_altitude,
                max_certainty=drop.max_certainty_seen,
                count=drop.observation_count,
            )
            if keep.location != old:
                self._unindex(keep, old)
                self._index(keep)
            obj = keep

    def prune_missed(
        self,
        pose: Pose,
        camera: CameraModel,
        detections_geo: Sequence[Sequence[float]],
        c_accept: float,
        d_dist: float = DEFAULT_D_DIST,
        margin: float = 0.35,
        altitude: Optional[float] = None,
    ) -> list[MapObject]:
        """Remove presumed false positives that should have been re-detected.

        An object is dropped when it is visible (with ``margin``) from ``pose``,
        no current detection lies within ``d_dist``, the current altitude is
        strictly below every altitude it was seen from, and its highest
        certainty ever seen is below ``c_accept``. ``altitude`` defaults to the
        pose altitude. Returns the removed objects.
        """
        if not self._objects:
            return []
        current = pose.altitude if altitude is None else altitude
        objs = self.objects
        locs = np.array([o.location for o in objs], dtype=float)
        candidates = visible_mask(locs, pose, camera, margin)
        candidates &= np.array([current < o.min_view_altitude and o.max_certainty_seen < c_accept for o in objs])
        if not candidates.any():
            return []
        dets = np.asarray(detections_geo, dtype=float).reshape(-1, 2)
        removed = []
        for i in np.flatnonzero(candidates):
            obj = objs[i]
            if len(dets) and np.min(np.hypot(dets[:, 0] - obj.location[0], dets[:, 1] - obj.location[1])) < d_dist:
                continue
            self.remove(obj)
            removed.append(obj)
        return removed

    def accepted_objects(self, c_eval: float = 0.5) -> list[MapObject]:
        """Objects with stored certainty strictly above ``c_eval``."""
        if not 0.0 <= c_eval <= 1.0:
            raise ValueError("c_eval must be in [0, 1]")
        return [o for o in self._objects.values() if o.certainty > c_eval]
