"""Camera geometry and georeferencing for a nadir-looking UAV camera.

Conventions
-----------
World frame: planar UTM-like frame in meters, x = easting, y = northing.
Heading: radians, counter-clockwise from north. A UAV with heading ``psi``
flies along ``(-sin psi, cos psi)``.
Image frame: origin top-left, u to the right, v down. Image "up" is the
flight direction.
Local camera frame: origin at the image center, x along u, y along v, meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


class GeoPoint(NamedTuple):
    easting: float
    northing: float


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera without distortion. Sensor sizes and focal length in mm."""

    sensor_width: float = 36.0
    sensor_height: float = 24.0
    focal_length: float = 35.0
    image_width: int = 8192
    image_height: int = 5460

    def __post_init__(self):
        for name in ("sensor_width", "sensor_height", "focal_length", "image_width", "image_height"):
            if not getattr(self, name) > 0:
                raise ValueError(f"camera {name} must be positive, got {getattr(self, name)}")
        sensor_aspect = self.sensor_width / self.sensor_height
        image_aspect = self.image_width / self.image_height
        if abs(sensor_aspect / image_aspect - 1.0) > 0.01:
            raise ValueError(
                f"sensor aspect {sensor_aspect:.4f} does not match image aspect {image_aspect:.4f}"
            )


def normalize_angle(angle: float) -> float:
    """Wrap an angle to [0, 2*pi)."""
    a = math.fmod(angle, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2*pi
    return 0.0 if a >= TWO_PI else a


@dataclass(frozen=True)
class Pose:
    easting: float
    northing: float
    altitude: float
    heading: float = 0.0
    gimbal_roll: float = 0.0
    gimbal_pitch: float = 0.0

    def __post_init__(self):
        if not self.altitude > 0:
            raise ValueError(f"altitude must be positive, got {self.altitude}")
        object.__setattr__(self, "heading", normalize_angle(self.heading))

    @property
    def position(self) -> GeoPoint:
        return GeoPoint(self.easting, self.northing)


def field_of_view(camera: CameraModel, altitude: float) -> tuple[float, float]:
    """Ground extent (width, height) in meters imaged from ``altitude``."""
    if not altitude > 0:
        raise ValueError(f"altitude must be positive, got {altitude}")
    return (
        camera.sensor_width * altitude / camera.focal_length,
        camera.sensor_height * altitude / camera.focal_length,
    )


def pixel_to_local(pixel: Sequence[float], camera: CameraModel, altitude: float) -> tuple[float, float]:
    u, v = pixel
    if not (0.0 <= u <= camera.image_width and 0.0 <= v <= camera.image_height):
        raise ValueError(f"pixel ({u}, {v}) outside {camera.image_width}x{camera.image_height} image")
    fov_w, fov_h = field_of_view(camera, altitude)
    return (u / camera.image_width - 0.5) * fov_w, (v / camera.image_height - 0.5) * fov_h


def local_to_pixel(local: Sequence[float], camera: CameraModel, altitude: float) -> tuple[float, float]:
    """Inverse of :func:`pixel_to_local`; no bounds check."""
    x, y = local
    fov_w, fov_h = field_of_view(camera, altitude)
    return (x / fov_w + 0.5) * camera.image_width, (y / fov_h + 0.5) * camera.image_height


def _rotation(heading: float) -> np.ndarray:
    c, s = math.cos(heading), math.sin(heading)
    return np.array([[c, -s], [s, c]])


def local_to_world_array(local: np.ndarray, pose: Pose) -> np.ndarray:
    """Vectorised local -> world for an (n, 2) array. Gimbal angles are ignored."""
    local = np.asarray(local, dtype=float).reshape(-1, 2)
    flipped = np.column_stack((local[:, 0], -local[:, 1]))
    return flipped @ _rotation(pose.heading).T + np.array([pose.easting, pose.northing])


def world_to_local_array(points: np.ndarray, pose: Pose) -> np.ndarray:
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    rel = points - np.array([pose.easting, pose.northing])
    flipped = rel @ _rotation(pose.heading)
    return np.column_stack((flipped[:, 0], -flipped[:, 1]))


def local_to_utm(local: Sequence[float], pose: Pose) -> GeoPoint:
    x, y = local
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    # image v grows southwards for a north-up camera
    return GeoPoint(c * x + s * y + pose.easting, s * x - c * y + pose.northing)


def utm_to_local(point: Sequence[float], pose: Pose) -> tuple[float, float]:
    dx = point[0] - pose.easting
    dy = point[1] - pose.northing
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    return c * dx + s * dy, s * dx - c * dy


def pixel_to_utm(pixel: Sequence[float], pose: Pose, camera: CameraModel) -> GeoPoint:
    return local_to_utm(pixel_to_local(pixel, camera, pose.altitude), pose)


def utm_to_pixel(point: Sequence[float], pose: Pose, camera: CameraModel) -> tuple[float, float]:
    return local_to_pixel(utm_to_local(point, pose), camera, pose.altitude)


def pixels_to_world(pixels: np.ndarray, pose: Pose, camera: CameraModel) -> np.ndarray:
    pixels = np.asarray(pixels, dtype=float).reshape(-1, 2)
    fov_w, fov_h = field_of_view(camera, pose.altitude)
    local = np.column_stack(
        ((pixels[:, 0] / camera.image_width - 0.5) * fov_w, (pixels[:, 1] / camera.image_height - 0.5) * fov_h)
    )
    return local_to_world_array(local, pose)


def world_to_pixels(points: np.ndarray, pose: Pose, camera: CameraModel) -> np.ndarray:
    local = world_to_local_array(points, pose)
    fov_w, fov_h = field_of_view(camera, pose.altitude)
    return np.column_stack(
        ((local[:, 0] / fov_w + 0.5) * camera.image_width, (local[:, 1] / fov_h + 0.5) * camera.image_height)
    )


def footprint(pose: Pose, camera: CameraModel) -> list[GeoPoint]:
    """Ground corners of the image, in order top-left, top-right, bottom-right, bottom-left.

    Computed from the pose as given, assuming a nadir camera.
    """
    fov_w, fov_h = field_of_view(camera, pose.altitude)
    hw, hh = fov_w / 2.0, fov_h / 2.0
    corners = [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)]
    return [local_to_utm(c, pose) for c in corners]


def is_visible(point: Sequence[float], pose: Pose, camera: CameraModel, margin: float = 0.0) -> bool:
    """True iff ``point`` lies in the footprint shrunk by ``margin`` on every side."""
    if margin < 0:
        raise ValueError(f"margin must be non-negative, got {margin}")
    fov_w, fov_h = field_of_view(camera, pose.altitude)
    x, y = utm_to_local(point, pose)
    return abs(x) <= fov_w / 2.0 - margin and abs(y) <= fov_h / 2.0 - margin


def visible_mask(points: np.ndarray, pose: Pose, camera: CameraModel, margin: float = 0.0) -> np.ndarray:
    """Vectorised :func:`is_visible` over an (n, 2) array."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(points) == 0:
        return np.zeros(0, dtype=bool)
    fov_w, fov_h = field_of_view(camera, pose.altitude)
    local = world_to_local_array(points, pose)
    return (np.abs(local[:, 0]) <= fov_w / 2.0 - margin) & (np.abs(local[:, 1]) <= fov_h / 2.0 - margin)


def tilt_offset(pose: Pose) -> GeoPoint:
    """Ground shift of the image center caused by gimbal roll and pitch.

    Roll moves the view towards image right, pitch towards image up (the flight
    direction), each by ``altitude * tan(angle)``.
    """
    right = pose.altitude * math.tan(pose.gimbal_roll)
    forward = pose.altitude * math.tan(pose.gimbal_pitch)
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    return GeoPoint(c * right - s * forward, s * right + c * forward)


def effective_nadir_pose(pose: Pose) -> Pose:
    """Nadir pose whose view equals the (small-angle) view of a tilted camera."""
    dx, dy = tilt_offset(pose)
    return replace(
        pose, easting=pose.easting + dx, northing=pose.northing + dy, gimbal_roll=0.0, gimbal_pitch=0.0
    )


def heading_towards(origin: Sequence[float], target: Sequence[float], default: float = 0.0) -> float:
    """Heading (ccw from north) of the vector ``origin -> target``."""
    dx = target[0] - origin[0]
    dy = target[1] - origin[1]
    if dx == 0.0 and dy == 0.0:
        return default
    return normalize_angle(math.atan2(-dx, dy))
