"""Synthetic ground truth: uniform and clustered object layouts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..coverage import FieldPolygon
from ..geo import GeoPoint

CLASS_NAMES = ("type-i", "type-ii")
MIN_OBJECT_DISTANCE = 1.0
MIN_CLUSTER_DISTANCE = 15.0


class PlacementError(RuntimeError):
    """Objects could not be placed under the spacing constraints."""


@dataclass(frozen=True)
class WorldObject:
    location: GeoPoint
    class_label: int
    cluster_id: Optional[int] = None


def world_arrays(world: list[WorldObject]) -> tuple[np.ndarray, np.ndarray]:
    locs = np.array([o.location for o in world], dtype=float).reshape(-1, 2)
    classes = np.array([o.class_label for o in world], dtype=int)
    return locs, classes


class _SpacingIndex:
    """Grid index answering 'is anything closer than min_dist?'."""

    def __init__(self, min_dist: float):
        self.min_dist = min_dist
        self.cells: dict[tuple[int, int], list[tuple[float, float]]] = {}

    def _key(self, p):
        return int(np.floor(p[0] / self.min_dist)), int(np.floor(p[1] / self.min_dist))

    def fits(self, p) -> bool:
        kx, ky = self._key(p)
        for gx in (kx - 1, kx, kx + 1):
            for gy in (ky - 1, ky, ky + 1):
                for q in self.cells.get((gx, gy), ()):
                    if (q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2 < self.min_dist**2:
                        return False
        return True

    def add(self, p):
        self.cells.setdefault(self._key(p), []).append((float(p[0]), float(p[1])))


def _uniform_in(field: FieldPolygon, rng: np.random.Generator) -> np.ndarray:
    x0, y0, x1, y1 = field.bounds
    while True:
        p = rng.uniform((x0, y0), (x1, y1))
        if field.contains(p)[0]:
            return p


def generate_uniform(
    field: FieldPolygon,
    n: int,
    rng: np.random.Generator,
    min_dist: float = MIN_OBJECT_DISTANCE,
    max_rejections: int = 10_000,
) -> list[WorldObject]:
    """``n`` objects uniform over the field, at least ``min_dist`` apart.

    Classes alternate. Raises :class:`PlacementError` after ``max_rejections``
    consecutive rejected proposals.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    index = _SpacingIndex(min_dist)
    out: list[WorldObject] = []
    misses = 0
    while len(out) < n:
        p = _uniform_in(field, rng)
        if not index.fits(p):
            misses += 1
            if misses >= max_rejections:
                raise PlacementError(f"placed only {len(out)} of {n} objects with {min_dist} m spacing")
            continue
        misses = 0
        index.add(p)
        out.append(WorldObject(GeoPoint(float(p[0]), float(p[1])), len(out) % 2))
    return out


def cluster_sizes(n: int, rng: np.random.Generator, mean: float = 8.0, sd: float = 3.0) -> list[int]:
    """Cluster sizes ``round(N(mean, sd))`` (redrawn below 1) until they sum to ``n``.

    The last cluster is truncated.
    """
    sizes: list[int] = []
    total = 0
    while total < n:
        k = int(np.round(rng.normal(mean, sd)))
        if k < 1:
            continue
        k = min(k, n - total)
        sizes.append(k)
        total += k
    return sizes


def cluster_covariance(rng: np.random.Generator, mean: float = 5.0, sd: float = 2.0) -> np.ndarray:
    """Random covariance ``A @ A.T`` with ``A_ij ~ N(mean, sd)``."""
    a = rng.normal(mean, sd, (2, 2))
    return a @ a.T


def _draw_members(field, center, size, index, rng, max_attempts):
    """``size`` members around ``center``, or None if the cluster saturates."""
    cov = cluster_covariance(rng)
    # A A^T is PSD; tiny negative eigenvalues from round-off are clipped
    w, v = np.linalg.eigh(cov)
    transform = v * np.sqrt(np.clip(w, 0.0, None))
    local = _SpacingIndex(index.min_dist)
    members = []
    for _ in range(size):
        for _ in range(max_attempts):
            p = center + transform @ rng.standard_normal(2)
            if field.contains(p)[0] and index.fits(p) and local.fits(p):
                break
        else:
            return None
        local.add(p)
        members.append(p)
    return members


def generate_clustered(
    field: FieldPolygon,
    n: int,
    rng: np.random.Generator,
    min_dist: float = MIN_OBJECT_DISTANCE,
    center_min_dist: float = MIN_CLUSTER_DISTANCE,
    max_attempts: int = 2_000,
    max_redraws: int = 100,
) -> list[WorldObject]:
    """Objects in Gaussian clusters.

    Cluster centers are uniform in the field and at least ``center_min_dist``
    apart; when no such spot turns up in ``max_attempts`` draws (many
    clusters on a small field) the most isolated candidate is used. Members
    are drawn from ``N(center, A A^T)`` and redrawn while they
    fall outside the field or closer than ``min_dist`` to an existing object.
    A cluster whose members cannot all be placed within ``max_attempts``
    draws each gets a fresh covariance, up to ``max_redraws`` times.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    sizes = cluster_sizes(n, rng)
    center_list: list[np.ndarray] = []
    for _ in sizes:
        best, best_gap = None, -1.0
        for _ in range(max_attempts):
            p = _uniform_in(field, rng)
            gap = float(np.min(np.hypot(*(np.array(center_list) - p).T))) if center_list else np.inf
            if gap > best_gap:
                best, best_gap = p, gap
            if gap >= center_min_dist:
                break
        # a crowded field falls back to the most isolated candidate
        center_list.append(best)

    index = _SpacingIndex(min_dist)
    out: list[WorldObject] = []
    for c, (size, center) in enumerate(zip(sizes, center_list)):
        for _ in range(max_redraws):
            members = _draw_members(field, center, size, index, rng, max_attempts)
            if members is not None:
                break
        else:
            raise PlacementError(f"placed only {len(out)} of {n} objects: cluster {c} is saturated")
        for p in members:
            index.add(p)
            out.append(WorldObject(GeoPoint(float(p[0]), float(p[1])), len(out) % 2, c))
    return out
