"""Parametric description of the synthetic detector's behaviour over altitude."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

ANCHOR_FIELDS = (
    "p_detect",
    "fp_rate",
    "tp_alpha",
    "tp_beta",
    "fp_alpha",
    "fp_beta",
    "sigma_px",
    "class_error",
)


@dataclass(frozen=True)
class AltitudeAnchor:
    """Detector behaviour at one altitude.

    Attributes:
        altitude: Flight altitude in meters.
        p_detect: Probability that a visible object yields a detection.
        fp_rate: Mean number of false positives per image (Poisson).
        tp_alpha, tp_beta: Beta distribution of true-positive confidences.
        fp_alpha, fp_beta: Beta distribution of false-positive confidences.
        sigma_px: Standard deviation of the detection center in pixels.
        class_error: Probability that a true positive carries the wrong class.
    """

    altitude: float
    p_detect: float
    fp_rate: float
    tp_alpha: float
    tp_beta: float
    fp_alpha: float
    fp_beta: float
    sigma_px: float
    class_error: float = 0.0

    def __post_init__(self):
        if not self.altitude > 0:
            raise ValueError("anchor altitude must be positive")
        if not 0.0 <= self.p_detect <= 1.0:
            raise ValueError("p_detect must be in [0, 1]")
        if not 0.0 <= self.class_error <= 1.0:
            raise ValueError("class_error must be in [0, 1]")
        if self.fp_rate < 0 or self.sigma_px < 0:
            raise ValueError("fp_rate and sigma_px must be non-negative")
        for a, b in ((self.tp_alpha, self.tp_beta), (self.fp_alpha, self.fp_beta)):
            if a < 0 or b < 0 or a + b <= 0:
                raise ValueError("Beta parameters must be non-negative and not both zero")


@dataclass(frozen=True)
class DetectorProfile:
    """Anchors plus altitude-independent settings of the stochastic detector.

    Between anchors every parameter is interpolated linearly; outside the
    anchor range the nearest anchor is used and the result is flagged as an
    extrapolation.
    """

    anchors: tuple[AltitudeAnchor, ...]
    object_size: float = 0.10
    class_count: int = 2
    mc_runs: int = 20
    keep_tp: float = 0.99
    keep_fp: float = 0.97
    box_jitter_tp: float = 0.06
    box_jitter_fp: float = 0.15
    confidence_jitter: float = 0.05
    score_jitter: float = 0.6
    tp_score_peak: float = 3.0
    fp_score_peak: float = 0.8
    # confidences fixed at their Beta mean instead of sampled
    deterministic: bool = False

    def __post_init__(self):
        if not self.anchors:
            raise ValueError("profile needs at least one anchor")
        anchors = tuple(sorted(self.anchors, key=lambda a: a.altitude))
        alts = [a.altitude for a in anchors]
        if len(set(alts)) != len(alts):
            raise ValueError("duplicate anchor altitudes")
        object.__setattr__(self, "anchors", anchors)
        if self.class_count < 1 or self.mc_runs < 1:
            raise ValueError("class_count and mc_runs must be >= 1")

    @property
    def calibrated_range(self) -> tuple[float, float]:
        return self.anchors[0].altitude, self.anchors[-1].altitude

    def in_range(self, altitude: float) -> bool:
        lo, hi = self.calibrated_range
        return lo - 1e-9 <= altitude <= hi + 1e-9

    def at(self, altitude: float) -> AltitudeAnchor:
        alts = np.array([a.altitude for a in self.anchors])
        values = {
            name: float(np.interp(altitude, alts, [getattr(a, name) for a in self.anchors]))
            for name in ANCHOR_FIELDS
        }
        return AltitudeAnchor(altitude=altitude, **values)

    def with_anchor(self, anchor: AltitudeAnchor) -> "DetectorProfile":
        rest = [a for a in self.anchors if a.altitude != anchor.altitude]
        return replace(self, anchors=tuple(rest + [anchor]))

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "anchors"}
        out["anchors"] = [asdict(a) for a in self.anchors]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "DetectorProfile":
        data = dict(data)
        anchors = tuple(AltitudeAnchor(**a) for a in data.pop("anchors"))
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown detector profile keys: {sorted(unknown)}")
        return cls(anchors=anchors, **data)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=False))

    @classmethod
    def load(cls, path: str | Path) -> "DetectorProfile":
        return cls.from_dict(yaml.safe_load(Path(path).read_text()))


def default_profile() -> DetectorProfile:
    """The calibrated profile shipped with the package."""
    text = resources.files("adaptive_planner").joinpath("data/default_profile.yaml").read_text()
    return DetectorProfile.from_dict(yaml.safe_load(text))


def noiseless_profile(
    altitudes: Sequence[float] = (12.0, 48.0), confidence: float = 1.0
) -> DetectorProfile:
    """Every visible object detected exactly once, no false positives, fixed confidence."""
    anchors = tuple(
        AltitudeAnchor(
            altitude=h,
            p_detect=1.0,
            fp_rate=0.0,
            tp_alpha=confidence,
            tp_beta=1.0 - confidence,
            fp_alpha=1.0,
            fp_beta=1.0,
            sigma_px=0.0,
        )
        for h in altitudes
    )
    return DetectorProfile(
        anchors=anchors,
        keep_tp=1.0,
        keep_fp=1.0,
        box_jitter_tp=0.0,
        box_jitter_fp=0.0,
        confidence_jitter=0.0,
        score_jitter=0.0,
        deterministic=True,
    )
