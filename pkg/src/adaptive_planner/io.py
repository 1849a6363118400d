"""File formats: GeoJSON for fields, worlds, maps and paths; CSV for tables.

GeoJSON follows the RFC 7946 structure with coordinates in local meters.
The coordinate frame is named in a ``crs`` foreign member and the run
configuration travels along in a ``config`` foreign member. CSV files start
with ``#`` comment lines holding the configuration, then a header row; they
are UTF-8 with LF line endings.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

from .coverage import FieldPolygon, FlightPath
from .geo import GeoPoint
from .mapping import MapObject
from .sim.worlds import CLASS_NAMES, WorldObject

CRS_NOTE = {"type": "local", "units": "m", "axes": ["easting", "northing"]}


class FormatError(ValueError):
    """A file does not have the expected structure."""


def _dump(obj: Mapping, path: str | Path) -> None:
    text = json.dumps(obj, indent=1, sort_keys=False, allow_nan=False) + "\n"
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _collection(features: list[dict], kind: str, config: Optional[Mapping]) -> dict:
    out: dict[str, Any] = {"type": "FeatureCollection", "crs": CRS_NOTE, "kind": kind}
    if config is not None:
        out["config"] = config
    out["features"] = features
    return out


def _class_name(label: int) -> str:
    return CLASS_NAMES[label] if 0 <= label < len(CLASS_NAMES) else str(label)


def _class_label(value) -> int:
    if isinstance(value, int):
        return value
    try:
        return CLASS_NAMES.index(value)
    except ValueError:
        raise FormatError(f"unknown class {value!r}") from None


# -- field ---------------------------------------------------------------------


def field_to_geojson(field: FieldPolygon, config: Optional[Mapping] = None) -> dict:
    ring = [list(map(float, v)) for v in field.vertices]
    ring.append(ring[0])
    feature = {"type": "Feature", "geometry": {"type": "Polygon", "coordinates": [ring]}, "properties": {}}
    return _collection([feature], "field", config)


def field_from_geojson(data: Mapping) -> FieldPolygon:
    """First Polygon found in a FeatureCollection, Feature or bare geometry."""
    geometry = data
    if data.get("type") == "FeatureCollection":
        polys = [f["geometry"] for f in data.get("features", []) if f.get("geometry", {}).get("type") == "Polygon"]
        if not polys:
            raise FormatError("no Polygon feature in collection")
        geometry = polys[0]
    elif data.get("type") == "Feature":
        geometry = data.get("geometry") or {}
    if geometry.get("type") != "Polygon":
        raise FormatError("expected a Polygon geometry")
    ring = [tuple(map(float, p[:2])) for p in geometry["coordinates"][0]]
    if len(ring) > 1 and ring[0] == ring[-1]:
        ring = ring[:-1]
    return FieldPolygon(ring)


def save_field(field: FieldPolygon, path: str | Path, config: Optional[Mapping] = None) -> None:
    _dump(field_to_geojson(field, config), path)


def load_field(path: str | Path) -> FieldPolygon:
    return field_from_geojson(json.loads(Path(path).read_text(encoding="utf-8")))


# -- world ---------------------------------------------------------------------


def world_to_geojson(world: Sequence[WorldObject], config: Optional[Mapping] = None) -> dict:
    features = [
        {
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [o.location.easting, o.location.northing]},
            "properties": {"class": _class_name(o.class_label), "cluster": o.cluster_id},
        }
        for o in world
    ]
    return _collection(features, "world", config)


def world_from_geojson(data: Mapping) -> list[WorldObject]:
    out = []
    for f in data.get("features", []):
        geom = f.get("geometry") or {}
        if geom.get("type") != "Point":
            raise FormatError("world features must be Points")
        x, y = map(float, geom["coordinates"][:2])
        props = f.get("properties") or {}
        out.append(WorldObject(GeoPoint(x, y), _class_label(props.get("class", 0)), props.get("cluster")))
    return out


def save_world(world: Sequence[WorldObject], path: str | Path, config: Optional[Mapping] = None) -> None:
    _dump(world_to_geojson(world, config), path)


def load_world(path: str | Path) -> list[WorldObject]:
    return world_from_geojson(json.loads(Path(path).read_text(encoding="utf-8")))


# -- map and paths ---------------------------------------------------------------


def map_to_geojson(objects: Iterable[MapObject], config: Optional[Mapping] = None) -> dict:
    features = [
        {
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [o.location.easting, o.location.northing]},
            "properties": {
                "id": o.id,
                "class": _class_name(o.class_label),
                "certainty": o.certainty,
                "min_view_altitude": o.min_view_altitude,
                "max_certainty_seen": o.max_certainty_seen,
                "observations": o.observation_count,
            },
        }
        for o in objects
    ]
    return _collection(features, "map", config)


def path_to_feature(path: FlightPath) -> dict:
    coords = [[float(p[0]), float(p[1])] for p in path.points()]
    waypoints = [
        {
            "easting": wp.position[0],
            "northing": wp.position[1],
            "altitude": wp.altitude,
            "heading": wp.heading,
            "target_id": wp.target_id,
        }
        for wp in path.waypoints
    ]
    # a LineString needs two positions; shorter paths become a Point/MultiPoint
    if len(coords) >= 2:
        geometry = {"type": "LineString", "coordinates": coords}
    elif coords:
        geometry = {"type": "Point", "coordinates": coords[0]}
    else:
        geometry = None
    return {
        "type": "Feature",
        "geometry": geometry,
        "properties": {
            "kind": path.kind,
            "length": path.length if path.waypoints else 0.0,
            "has_start": path.start is not None,
            "waypoints": waypoints,
        },
    }


def paths_to_geojson(paths: Sequence[FlightPath], config: Optional[Mapping] = None) -> dict:
    return _collection([path_to_feature(p) for p in paths], "paths", config)


def save_geojson(data: Mapping, path: str | Path) -> None:
    _dump(data, path)


# -- CSV -------------------------------------------------------------------------


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def csv_text(rows: Sequence[Mapping], fields: Sequence[str], config: Optional[Mapping] = None) -> str:
    buf = io.StringIO()
    if config is not None:
        buf.write("# config: " + json.dumps(config, sort_keys=True, allow_nan=False) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_cell(row.get(f)) for f in fields])
    return buf.getvalue()


def write_csv(
    path: str | Path, rows: Sequence[Mapping], fields: Sequence[str], config: Optional[Mapping] = None
) -> None:
    Path(path).write_text(csv_text(rows, fields, config), encoding="utf-8", newline="\n")


def read_csv(path: str | Path) -> list[dict[str, str]]:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))
