"""Run configuration: a YAML file merged with command-line overrides.

Example::

    field: fields/plot.geojson      # omitted: 100 m x 75 m rectangle
    world: {distribution: clustered, n: 60, seed: 3}   # or a GeoJSON path
    profile: my_profile.yaml        # omitted: shipped calibrated profile
    level: perfect
    seed: 0
    output: out
    planner: {h_cov: 48, c_accept: 1.0, c_reject: 0.05}
    camera: {sensor_width: 36, sensor_height: 24, focal_length: 35,
             image_width: 8192, image_height: 5460}
    best:                           # planner cells for localization/density
      clustered: {h_cov: 48, c_accept: 1.0, c_reject: 0.05}
      uniform: {h_cov: 24, c_accept: 0.4, c_reject: 0.2}
"""

from __future__ import annotations

import dataclasses
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import yaml

from .coverage import FieldPolygon
from .detect import DetectorProfile, default_profile
from .geo import CameraModel
from .inspection import PlannerParams
from .io import load_field
from .sim.errors import LEVELS

DEFAULT_FIELD_SIZE = (100.0, 75.0)
# cells the sweep selects with the shipped profile (F1 - 0.5 r_diff)
DEFAULT_BEST = {
    "clustered": {"h_cov": 48.0, "c_accept": 1.0, "c_reject": 0.05},
    "uniform": {"h_cov": 24.0, "c_accept": 0.4, "c_reject": 0.2},
}
MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


@dataclass(frozen=True)
class WorldSpec:
    distribution: str = "clustered"
    n: int = 60
    seed: int = 0


@dataclass
class RunConfig:
    field: Optional[str] = None
    world: Union[str, WorldSpec] = dataclasses.field(default_factory=WorldSpec)
    profile: Optional[str] = None
    level: str = "perfect"
    seed: int = 0
    output: str = "out"
    planner: PlannerParams = dataclasses.field(default_factory=PlannerParams)
    camera: CameraModel = dataclasses.field(default_factory=CameraModel)
    best: dict[str, PlannerParams] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if not self.best:
            self.best = {d: replace(self.planner, **cell) for d, cell in DEFAULT_BEST.items()}
        self.validate()

    def validate(self) -> None:
        if self.level not in LEVELS:
            raise ConfigError(f"unknown level {self.level!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= MAX_SEED:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        for label, path in (("field", self.field), ("profile", self.profile)):
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"{label} file not found: {path}")
        if isinstance(self.world, str):
            if not Path(self.world).is_file():
                raise ConfigError(f"world file not found: {self.world}")
        elif self.world.distribution not in ("clustered", "uniform"):
            raise ConfigError(f"unknown distribution {self.world.distribution!r}")
        elif self.world.n < 0:
            raise ConfigError("world.n must be non-negative")

    # -- resolution -----------------------------------------------------------

    def load_field(self) -> FieldPolygon:
        if self.field is None:
            return FieldPolygon.rectangle(*DEFAULT_FIELD_SIZE)
        return load_field(self.field)

    def load_profile(self) -> DetectorProfile:
        return default_profile() if self.profile is None else DetectorProfile.load(self.profile)

    def to_dict(self) -> dict[str, Any]:
        """Plain-data view, embedded in output files."""
        return {
            "field": self.field,
            "world": self.world if isinstance(self.world, str) else asdict(self.world),
            "profile": self.profile,
            "level": self.level,
            "seed": self.seed,
            "planner": asdict(self.planner),
            "camera": asdict(self.camera),
            "best": {d: asdict(p) for d, p in self.best.items()},
        }


def _params(base: PlannerParams, data: Optional[Mapping]) -> PlannerParams:
    if not data:
        return base
    known = {f.name for f in fields(PlannerParams)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown planner keys: {sorted(unknown)}")
    try:
        return replace(base, **data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def from_mapping(data: Mapping[str, Any], overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Build a config from parsed YAML plus flat overrides (flags win).

    Override keys are top-level names (``seed``, ``level``, ...) or
    ``planner.<name>`` for planner parameters. ``None`` values are ignored.
    """
    data = dict(data or {})
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    known = {"field", "world", "profile", "level", "seed", "output", "planner", "camera", "best"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    planner_over = {k.split(".", 1)[1]: v for k, v in overrides.items() if k.startswith("planner.")}
    top = {k: v for k, v in overrides.items() if not k.startswith("planner.") and not k.startswith("world.")}
    world_over = {k.split(".", 1)[1]: v for k, v in overrides.items() if k.startswith("world.")}
    data.update(top)

    planner = _params(PlannerParams(), data.get("planner"))
    planner = _params(planner, planner_over)
    try:
        camera = CameraModel(**(data.get("camera") or {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"camera: {exc}") from None

    world = data.get("world")
    if isinstance(world, str):
        world_value: Union[str, WorldSpec] = world
    else:
        spec = dict(world or {})
        spec.update(world_over)
        try:
            world_value = WorldSpec(**spec)
        except TypeError as exc:
            raise ConfigError(f"world: {exc}") from None

    best_data = data.get("best") or DEFAULT_BEST
    best = {d: _params(planner, cell) for d, cell in best_data.items()}
    try:
        return RunConfig(
            field=data.get("field"),
            world=world_value,
            profile=data.get("profile"),
            level=data.get("level", "perfect"),
            seed=int(data.get("seed", 0)),
            output=str(data.get("output", "out")),
            planner=planner,
            camera=camera,
            best=best,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path: Optional[str | Path], overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    data: Mapping[str, Any] = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            data = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {p}: {exc}") from None
        if not isinstance(data, Mapping):
            raise ConfigError("config must be a mapping")
    return from_mapping(data, overrides)
