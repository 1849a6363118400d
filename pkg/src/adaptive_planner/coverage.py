"""Boustrophedon coverage planning over a polygonal field."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import shapely
from shapely.geometry import Polygon, box

from .geo import CameraModel, GeoPoint, field_of_view, heading_towards


class FieldPolygon:
    """Simple polygon in the local metric frame, stored counter-clockwise.

    ``first_vertex`` keeps the first vertex of the input order; it selects
    where the coverage pattern starts.
    """

    def __init__(self, vertices: Sequence[Sequence[float]]):
        pts = [GeoPoint(float(x), float(y)) for x, y in vertices]
        if len(pts) > 1 and pts[0] == pts[-1]:
            pts = pts[:-1]
        if len(pts) < 3:
            raise ValueError("field polygon needs at least 3 vertices")
        poly = Polygon(pts)
        if not poly.is_valid:
            raise ValueError("field polygon must be simple (non-self-intersecting)")
        if poly.area <= 0:
            raise ValueError("field polygon has zero area")
        self.first_vertex = pts[0]
        if not poly.exterior.is_ccw:
            pts = [pts[0]] + pts[:0:-1]
        self.vertices: list[GeoPoint] = pts
        self.shape = Polygon(pts)

    @classmethod
    def rectangle(cls, width: float, height: float, origin: Sequence[float] = (0.0, 0.0)) -> "FieldPolygon":
        x0, y0 = origin
        return cls([(x0, y0), (x0 + width, y0), (x0 + width, y0 + height), (x0, y0 + height)])

    @property
    def area(self) -> float:
        return self.shape.area

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return self.shape.bounds

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Vectorised point-in-polygon (boundary counts as inside)."""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        return shapely.intersects_xy(self.shape, points[:, 0], points[:, 1])

    def __repr__(self):
        return f"FieldPolygon({len(self.vertices)} vertices, area={self.area:.1f} m2)"


@dataclass(frozen=True)
class Waypoint:
    position: GeoPoint
    altitude: float
    heading: float = 0.0
    target_id: Optional[int] = None

    def __post_init__(self):
        if not self.altitude > 0:
            raise ValueError(f"waypoint altitude must be positive, got {self.altitude}")


@dataclass
class FlightPath:
    """Ordered capture waypoints.

    ``start`` is an optional departure point flown to before the first
    waypoint (no image is taken there); its leg counts towards the length.
    """

    waypoints: list[Waypoint]
    kind: str = "coverage"
    start: Optional[GeoPoint] = None
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.waypoints)

    def __iter__(self):
        return iter(self.waypoints)

    @property
    def length(self) -> float:
        if not self.waypoints:
            return 0.0
        return path_length(self)

    def points(self) -> np.ndarray:
        pts = [w.position for w in self.waypoints]
        if self.start is not None and pts:
            pts = [self.start] + pts
        return np.array(pts, dtype=float).reshape(-1, 2)


def path_length(path: FlightPath | Sequence[Waypoint]) -> float:
    """Sum of horizontal distances between consecutive waypoints.

    Climbs and descents are not counted.
    """
    if isinstance(path, FlightPath):
        if not path.waypoints:
            raise ValueError("path has no waypoints")
        pts = path.points()
    else:
        if len(path) == 0:
            raise ValueError("path has no waypoints")
        pts = np.array([w.position for w in path], dtype=float)
    if len(pts) < 2:
        return 0.0
    return float(np.hypot(*np.diff(pts, axis=0).T).sum())


def _longest_edge_direction(vertices: list[GeoPoint]) -> np.ndarray:
    pts = np.array(vertices, dtype=float)
    edges = np.roll(pts, -1, axis=0) - pts
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    # first longest edge wins ties
    k = int(np.argmax(lengths))
    return edges[k] / lengths[k]


def _count(extent: float, spacing: float) -> int:
    return max(1, math.ceil(extent / spacing - 1e-9))


def plan_coverage(
    field: FieldPolygon,
    camera: CameraModel,
    altitude: float,
    overlap_fraction: float = 0.10,
) -> FlightPath:
    """Serpentine coverage path at a fixed altitude.

    Rows run parallel to the longest polygon edge and are spaced
    ``(1 - overlap) * FOV_w`` apart; capture waypoints along a row are at most
    ``(1 - overlap) * FOV_h`` apart, with the first and last waypoint of each
    row on the polygon boundary. The UAV faces along its row, so the image
    width spans across rows.
    """
    if not 0.0 <= overlap_fraction < 1.0:
        raise ValueError(f"overlap fraction must be in [0, 1), got {overlap_fraction}")
    if field.area <= 0:
        raise ValueError("degenerate field polygon")
    fov_w, fov_h = field_of_view(camera, altitude)
    row_spacing = (1.0 - overlap_fraction) * fov_w
    step = (1.0 - overlap_fraction) * fov_h

    d = _longest_edge_direction(field.vertices)
    n = np.array([-d[1], d[0]])
    frame = np.column_stack((d, n))  # world -> (u, v) via p @ frame
    uv = np.array(field.vertices, dtype=float) @ frame
    rotated = Polygon(uv)
    umin, vmin, umax, vmax = rotated.bounds

    n_rows = _count(vmax - vmin, row_spacing)
    first_center = vmin + ((vmax - vmin) - (n_rows - 1) * row_spacing) / 2.0
    rows: list[tuple[float, float, float]] = []
    for k in range(n_rows):
        vc = first_center + k * row_spacing
        lo = vmin if k == 0 else vc - row_spacing / 2.0
        hi = vmax if k == n_rows - 1 else vc + row_spacing / 2.0
        band = rotated.intersection(box(umin - 1.0, lo, umax + 1.0, hi))
        if band.is_empty:
            continue
        a, _, b, _ = band.bounds
        rows.append((vc, a, b))

    # start at the end row and row end closest to the first input vertex
    start_uv = np.array(field.first_vertex, dtype=float) @ frame
    candidates = []
    for row_idx in (0, len(rows) - 1):
        vc, a, b = rows[row_idx]
        for u in (a, b):
            world = u * d + vc * n
            dist = math.hypot(u - start_uv[0], vc - start_uv[1])
            candidates.append((round(dist, 9), float(world[0]), float(world[1]), row_idx, u == a))
    _, _, _, start_row, forward = min(candidates)
    order = list(range(len(rows)))
    if start_row != 0:
        order.reverse()

    positions: list[np.ndarray] = []
    for row_idx in order:
        vc, a, b = rows[row_idx]
        count = 1 if b - a <= 1e-12 else _count(b - a, step) + 1
        us = np.linspace(a, b, count) if count > 1 else np.array([(a + b) / 2.0])
        if not forward:
            us = us[::-1]
        forward = not forward
        positions.extend(u * d + vc * n for u in us)

    waypoints = []
    row_heading = heading_towards((0.0, 0.0), d)
    for i, p in enumerate(positions):
        if i + 1 < len(positions):
            nxt = positions[i + 1]
            # the heading on a row transition keeps the current row's direction
            same_row = abs(float((nxt - p) @ n)) < 1e-9
            if same_row:
                heading = heading_towards(p, nxt)
            else:
                heading = waypoints[-1].heading if waypoints else row_heading
        else:
            heading = waypoints[-1].heading if waypoints else row_heading
        waypoints.append(Waypoint(GeoPoint(float(p[0]), float(p[1])), altitude, heading))
    return FlightPath(waypoints, kind="coverage", metadata={"rows": len(rows), "altitude": altitude})
