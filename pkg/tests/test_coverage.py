import math

import numpy as np
import pytest

from adaptive_planner.coverage import FieldPolygon, FlightPath, Waypoint, path_length, plan_coverage
from adaptive_planner.geo import GeoPoint

from coverage_oracle import random_convex_polygon, uncovered


def wp(x, y, h=12.0):
    return Waypoint(GeoPoint(x, y), h)


def test_small_square_single_row(camera36):
    square = FieldPolygon.rectangle(10.0, 10.0)
    path = plan_coverage(square, camera36, 12.0, 0.1)
    assert path.metadata["rows"] == 1
    assert len(path) >= 2
    assert len(uncovered(square, path, camera36)) == 0


def test_long_thin_rectangle(camera36):
    strip = FieldPolygon.rectangle(43.2, 7.2)
    path = plan_coverage(strip, camera36, 12.0, 0.1)
    assert path.metadata["rows"] == 1
    assert len(path) == math.ceil(43.2 / 7.2) + 1
    steps = np.hypot(*np.diff(path.points(), axis=0).T)
    assert steps == pytest.approx(7.2)
    assert len(uncovered(strip, path, camera36)) == 0


def test_rows_follow_longest_edge(camera36):
    # longest edge runs north-south, so the UAV flies north or south
    tall = FieldPolygon.rectangle(20.0, 80.0)
    path = plan_coverage(tall, camera36, 12.0)
    first = path.waypoints[0]
    assert math.sin(first.heading) == pytest.approx(0.0, abs=1e-9)


def test_starts_near_first_vertex(camera36):
    rect = FieldPolygon([(100, 75), (0, 75), (0, 0), (100, 0)])
    path = plan_coverage(rect, camera36, 24.0)
    start = path.waypoints[0].position
    assert math.dist(start, (100, 75)) < 15.0


def test_row_count_halves_when_altitude_doubles(field, camera):
    rows = [plan_coverage(field, camera, h).metadata["rows"] for h in (12.0, 24.0, 48.0)]
    assert rows[0] / rows[1] == pytest.approx(2.0, rel=0.3)
    assert rows[1] / rows[2] == pytest.approx(2.0, rel=0.5)


def test_default_field_lengths(field, camera):
    lengths = {h: plan_coverage(field, camera, h).length for h in (12.0, 24.0, 36.0, 48.0)}
    assert lengths[12.0] > lengths[24.0] > lengths[36.0] > lengths[48.0]
    assert 0.25 <= lengths[48.0] / lengths[12.0] <= 0.35


@pytest.mark.parametrize("seed", range(8))
def test_random_convex_fields_are_covered(seed, camera):
    rng = np.random.default_rng(seed)
    poly = FieldPolygon(random_convex_polygon(rng, 60.0))
    for h in (12.0, 36.0):
        path = plan_coverage(poly, camera, h)
        assert len(uncovered(poly, path, camera, step=0.2)) == 0


def test_nonconvex_field_is_covered(camera):
    ell = FieldPolygon([(0, 0), (60, 0), (60, 20), (20, 20), (20, 50), (0, 50)])
    path = plan_coverage(ell, camera, 12.0)
    assert len(uncovered(ell, path, camera, step=0.2)) == 0


def test_length_monotone_in_altitude(camera):
    rng = np.random.default_rng(3)
    for _ in range(10):
        poly = FieldPolygon(random_convex_polygon(rng, 150.0))
        if poly.area < 2000:
            continue
        assert plan_coverage(poly, camera, 24.0).length <= plan_coverage(poly, camera, 12.0).length


def test_planning_is_deterministic(field, camera):
    a = plan_coverage(field, camera, 24.0)
    b = plan_coverage(field, camera, 24.0)
    assert a.waypoints == b.waypoints


def test_headings_follow_rows(field, camera):
    path = plan_coverage(field, camera, 24.0)
    for a, b in zip(path.waypoints, path.waypoints[1:]):
        if abs((b.position[1] - a.position[1])) < 1e-9:  # same row
            assert math.cos(a.heading) == pytest.approx(0.0, abs=1e-9)


def test_invalid_overlap(field, camera):
    with pytest.raises(ValueError):
        plan_coverage(field, camera, 12.0, overlap_fraction=1.0)


@pytest.mark.parametrize(
    "vertices",
    [[(0, 0), (1, 1), (2, 2)], [(0, 0), (1, 0)], [(0, 0), (2, 2), (2, 0), (0, 2)]],
)
def test_degenerate_polygons_are_rejected(vertices):
    with pytest.raises(ValueError):
        FieldPolygon(vertices)


def test_polygon_is_normalized_counter_clockwise():
    poly = FieldPolygon([(0, 0), (0, 1), (1, 1), (1, 0)])
    assert poly.shape.exterior.is_ccw
    assert poly.first_vertex == (0, 0)


def test_path_length_examples():
    assert path_length([wp(0, 0)]) == 0.0
    assert path_length([wp(0, 0), wp(3, 4)]) == 5.0
    tour = [wp(0, 0), wp(10, 0), wp(10, 10), wp(0, 10), wp(0, 0)]
    assert path_length(tour) == 40.0


def test_path_length_ignores_altitude_changes():
    assert path_length([wp(0, 0, 48.0), wp(3, 4, 12.0)]) == 5.0


def test_path_length_counts_departure_leg():
    path = FlightPath([wp(3, 4)], kind="inspection", start=GeoPoint(0.0, 0.0))
    assert path.length == 5.0


def test_empty_path_has_no_length():
    with pytest.raises(ValueError):
        path_length([])
    assert FlightPath([]).length == 0.0
