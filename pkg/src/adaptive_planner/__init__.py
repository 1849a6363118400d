"""Adaptive UAV path planning for object search: high-altitude coverage plus
certainty-triggered low-altitude inspections, with an offline simulator."""

from .coverage import FieldPolygon, FlightPath, Waypoint, path_length, plan_coverage
from .geo import CameraModel, GeoPoint, Pose, field_of_view
from .inspection import Decision, PlannerParams, decide, plan_inspection
from .mapping import MapObject, ObjectMap, Observation

__version__ = "0.1.0"
