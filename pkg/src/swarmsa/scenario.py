"""World definition: terrain, procedurally generated forest, moving ground target.

Everything is generated deterministically from a seeded configuration so runs
can be replayed bit-identically.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import ConfigurationError


@dataclass(frozen=True)
class Rect:
    """Axis-aligned ground rectangle in meters."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ConfigurationError("bounds: rectangle is degenerate")

    @property
    def area_m2(self) -> float:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)

    @property
    def area_ha(self) -> float:
        return self.area_m2 / 10_000.0

    def contains(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax

    def to_list(self) -> list[float]:
        return [self.xmin, self.ymin, self.xmax, self.ymax]


@dataclass(frozen=True)
class Occluder:
    """Opaque horizontal crown disk at a given height, plus optional trunk."""

    center: tuple[float, float]
    radius: float
    height: float
    trunk_radius: float = 0.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ConfigurationError("occluder radius must be positive")


@dataclass(frozen=True)
class TargetTrack:
    """Piecewise-linear ground track of the target's center."""

    waypoints: tuple[tuple[float, float, float], ...]  # (time s, x, y)
    bbox_size: tuple[float, float]  # (length m, width m)
    signal_kind: str = "thermal"  # thermal (1 ch) | color (3 ch)

    def __post_init__(self):
        if not self.waypoints:
            raise ConfigurationError("target.waypoints: at least one waypoint required")
        times = [w[0] for w in self.waypoints]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ConfigurationError("target.waypoints: times must be strictly increasing")
        if self.bbox_size[0] <= 0 or self.bbox_size[1] <= 0:
            raise ConfigurationError("target.bbox_size: must be positive")
        if self.signal_kind not in ("thermal", "color"):
            raise ConfigurationError("target.signal_kind: must be 'thermal' or 'color'")


def _validate_signal(name: str, values, channels: int) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name}: expected a list of channel intensities")
    if len(vals) != channels:
        raise ConfigurationError(f"{name}: expected {channels} channel value(s), got {len(vals)}")
    if any(not (0.0 <= v <= 1.0) for v in vals):
        raise ConfigurationError(f"{name}: intensities must lie in [0, 1]")
    return vals


@dataclass(frozen=True)
class Scenario:
    bounds: Rect
    forest_density: float  # trees/ha
    canopy_height: float  # m
    crown_radius_range: tuple[float, float]
    target: TargetTrack
    background_signal: tuple[float, ...]
    occluder_signal: tuple[float, ...]
    target_signal: tuple[float, ...]
    seed: int
    occluders: tuple[Occluder, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.forest_density < 0:
            raise ConfigurationError("forest_density: must be non-negative")
        if self.canopy_height <= 0:
            raise ConfigurationError("canopy_height: must be positive")
        lo, hi = self.crown_radius_range
        if not (0 < lo <= hi):
            raise ConfigurationError("crown_radius_range: need 0 < min <= max")

    @property
    def channels(self) -> int:
        return 1 if self.target.signal_kind == "thermal" else 3


def generate_forest(density: float, bounds: Rect, crown_radius_range: tuple[float, float],
                    canopy_height: float, seed: int) -> tuple[Occluder, ...]:
    """Place round(density * area_ha) crown disks uniformly within bounds.

    Fixed count (not Poisson) so the density is honored exactly; deterministic
    per seed.
    """
    if density < 0:
        raise ConfigurationError("forest_density: must be non-negative")
    count = int(round(density * bounds.area_ha))
    rng = np.random.default_rng(seed)
    xs = rng.uniform(bounds.xmin, bounds.xmax, count)
    ys = rng.uniform(bounds.ymin, bounds.ymax, count)
    lo, hi = crown_radius_range
    radii = rng.uniform(lo, hi, count) if hi > lo else np.full(count, lo)
    return tuple(Occluder((float(x), float(y)), float(r), canopy_height)
                 for x, y, r in zip(xs, ys, radii))


def target_state(track: TargetTrack, time: float) -> tuple[np.ndarray, np.ndarray]:
    """Interpolated target center and heading-aligned bbox axis at `time`.

    Returns (center xy, unit motion direction). Time is clamped to the track's
    span; a stationary or single-waypoint target keeps the last known heading
    (north if it never moved).
    """
    wps = track.waypoints
    times = np.array([w[0] for w in wps])
    pts = np.array([[w[1], w[2]] for w in wps])
    if len(wps) == 1:
        return pts[0].copy(), np.array([0.0, 1.0])
    t = min(max(time, times[0]), times[-1])
    k = int(np.searchsorted(times, t, side="right") - 1)
    k = min(k, len(wps) - 2)
    t0, t1 = times[k], times[k + 1]
    frac = (t - t0) / (t1 - t0)
    center = pts[k] + frac * (pts[k + 1] - pts[k])
    direction = np.array([0.0, 1.0])
    # heading from the last segment with actual motion up to the current one
    for j in range(k, -1, -1):
        d = pts[j + 1] - pts[j]
        n = float(np.hypot(d[0], d[1]))
        if n > 1e-12:
            direction = d / n
            break
    return center, direction


def target_bbox_corners(track: TargetTrack, time: float) -> np.ndarray:
    """Corners (4, 2) of the oriented bbox at `time`, motion-aligned."""
    center, fwd = target_state(track, time)
    right = np.array([fwd[1], -fwd[0]])
    half_l, half_w = track.bbox_size[0] / 2.0, track.bbox_size[1] / 2.0
    return np.array([center + sl * half_l * fwd + sw * half_w * right
                     for sl, sw in ((1, 1), (1, -1), (-1, -1), (-1, 1))])


_REQUIRED_KEYS = {"bounds", "forest_density", "canopy_height", "crown_radius_range",
                  "target", "background_signal", "occluder_signal", "target_signal", "seed"}
_TARGET_KEYS = {"waypoints", "bbox_size", "signal_kind"}


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ConfigurationError("scenario: expected a mapping")
    unknown = set(doc) - _REQUIRED_KEYS
    if unknown:
        raise ConfigurationError(f"scenario: unknown key(s) {sorted(unknown)}")
    missing = _REQUIRED_KEYS - {"target"} - set(doc)
    if missing:
        raise ConfigurationError(f"scenario: missing key(s) {sorted(missing)}")
    if "target" not in doc:
        raise ConfigurationError("scenario: missing key(s) ['target']")

    tdoc = doc["target"]
    if not isinstance(tdoc, dict):
        raise ConfigurationError("target: expected a mapping")
    t_unknown = set(tdoc) - _TARGET_KEYS
    if t_unknown:
        raise ConfigurationError(f"target: unknown key(s) {sorted(t_unknown)}")
    if "waypoints" not in tdoc or "bbox_size" not in tdoc:
        raise ConfigurationError("target: waypoints and bbox_size are required")
    track = TargetTrack(
        waypoints=tuple(tuple(float(v) for v in wp) for wp in tdoc["waypoints"]),
        bbox_size=tuple(float(v) for v in tdoc["bbox_size"]),
        signal_kind=str(tdoc.get("signal_kind", "thermal")),
    )
    channels = 1 if track.signal_kind == "thermal" else 3

    try:
        density = float(doc["forest_density"])
    except (TypeError, ValueError):
        raise ConfigurationError("forest_density: not a number")
    if density < 0:
        raise ConfigurationError("forest_density: must be non-negative")

    bounds = Rect(*(float(v) for v in doc["bounds"]))
    canopy = float(doc["canopy_height"])
    crr = tuple(float(v) for v in doc["crown_radius_range"])
    seed = int(doc["seed"])
    scen = Scenario(
        bounds=bounds,
        forest_density=density,
        canopy_height=canopy,
        crown_radius_range=crr,
        target=track,
        background_signal=_validate_signal("background_signal", doc["background_signal"], channels),
        occluder_signal=_validate_signal("occluder_signal", doc["occluder_signal"], channels),
        target_signal=_validate_signal("target_signal", doc["target_signal"], channels),
        seed=seed,
    )
    occluders = generate_forest(density, bounds, crr, canopy, seed)
    object.__setattr__(scen, "occluders", occluders)
    return scen


def scenario_to_dict(scen: Scenario) -> dict:
    return {
        "bounds": scen.bounds.to_list(),
        "forest_density": scen.forest_density,
        "canopy_height": scen.canopy_height,
        "crown_radius_range": list(scen.crown_radius_range),
        "target": {
            "waypoints": [list(wp) for wp in scen.target.waypoints],
            "bbox_size": list(scen.target.bbox_size),
            "signal_kind": scen.target.signal_kind,
        },
        "background_signal": list(scen.background_signal),
        "occluder_signal": list(scen.occluder_signal),
        "target_signal": list(scen.target_signal),
        "seed": scen.seed,
    }


def load_scenario(text: str) -> Scenario:
    """Parse and fully validate a scenario configuration document (YAML)."""
    try:
        doc = yaml.safe_load(io.StringIO(text))
    except yaml.YAMLError as e:
        raise ConfigurationError(f"scenario: parse error: {e}")
    return scenario_from_dict(doc)


def save_scenario(scen: Scenario) -> str:
    """Canonical serialization; load_scenario(save_scenario(s)) == s."""
    return yaml.safe_dump(scenario_to_dict(scen), sort_keys=True)
