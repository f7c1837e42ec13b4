"""Synthetic nadir camera: ray-cast frames against the occluder set, plus the
reported-vs-true pose gap (compass drift, GPS jitter) downstream modules must
absorb."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, InvalidPoseError
from .geometry import ground_grid, heading_basis
from .scenario import Scenario, target_state

DEFAULT_POS_SIGMA = 0.02  # m, RTK-grade


@dataclass(frozen=True)
class Pose:
    position: tuple[float, float, float]  # z = altitude AGL
    heading: float  # degrees clockwise from north

    def __post_init__(self):
        if self.position[2] <= 0:
            raise ConfigurationError("pose altitude must be positive")

    @property
    def xy(self) -> np.ndarray:
        return np.array(self.position[:2])


@dataclass(frozen=True)
class CameraModel:
    fov: float  # degrees, square frustum
    resolution: tuple[int, int]  # (width, height) px

    def __post_init__(self):
        if not (0 < self.fov < 180):
            raise ConfigurationError("camera fov must be in (0, 180) degrees")
        if self.resolution[0] < 16 or self.resolution[1] < 16:
            raise ConfigurationError("camera resolution must be at least 16x16")


@dataclass(frozen=True)
class Frame:
    pixels: np.ndarray  # (H, W, C), C in {1, 3}, values in [0, 1]
    pose_reported: Pose
    pose_true: Pose  # oracle/tests only; pipeline code must use pose_reported
    timestamp: float


@dataclass(frozen=True)
class DriftState:
    heading_error: float  # degrees
    bound: float  # degrees
    step_sigma: float  # degrees per iteration

    def __post_init__(self):
        if abs(self.heading_error) > self.bound + 1e-12:
            raise ConfigurationError("drift heading_error exceeds bound")


def render_frame(scenario: Scenario, pose_true: Pose, camera: CameraModel,
                 time: float, noise_sigma: float, seed) -> Frame:
    """Ray-cast one frame from the true pose.

    Per pixel the central ray is cast downward; the nearest crown disk (or trunk)
    wins, otherwise the ground yields the target or background signal. Additive
    zero-mean Gaussian noise with std noise_sigma, clamped to [0, 1].
    """
    z = pose_true.position[2]
    if z <= scenario.canopy_height:
        raise InvalidPoseError(
            f"pose altitude {z} m is not above canopy height {scenario.canopy_height} m")

    w, h = camera.resolution
    pos = np.array(pose_true.position)
    ground = ground_grid(pos, pose_true.heading, camera.fov, w, h)

    channels = scenario.channels
    pixels = np.empty((h, w, channels))
    pixels[:] = scenario.background_signal

    # ground hit: target bbox test in the target's motion-aligned frame
    center, fwd = target_state(scenario.target, time)
    right = np.array([fwd[1], -fwd[0]])
    rel = ground - center
    along = rel[..., 0] * fwd[0] + rel[..., 1] * fwd[1]
    across = rel[..., 0] * right[0] + rel[..., 1] * right[1]
    half_l, half_w = scenario.target.bbox_size[0] / 2, scenario.target.bbox_size[1] / 2
    tmask = (np.abs(along) <= half_l) & (np.abs(across) <= half_w)
    pixels[tmask] = scenario.target_signal

    # occluders: crown disks at canopy height, optional trunk cylinders below
    occluded = np.zeros((h, w), dtype=bool)
    gx_lo, gx_hi = ground[..., 0].min(), ground[..., 0].max()
    gy_lo, gy_hi = ground[..., 1].min(), ground[..., 1].max()
    for occ in scenario.occluders:
        reach = max(occ.radius, occ.trunk_radius)
        if (occ.center[0] + reach < gx_lo or occ.center[0] - reach > gx_hi
                or occ.center[1] + reach < gy_lo or occ.center[1] - reach > gy_hi):
            continue
        frac = 1.0 - occ.height / z  # ray parameter at the crown plane
        ox = pos[0] + frac * (ground[..., 0] - pos[0])
        oy = pos[1] + frac * (ground[..., 1] - pos[1])
        hit = (ox - occ.center[0]) ** 2 + (oy - occ.center[1]) ** 2 <= occ.radius ** 2
        if occ.trunk_radius > 0:
            hit |= _trunk_hit(pos, ground, occ)
        occluded |= hit
    pixels[occluded] = scenario.occluder_signal

    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        pixels = pixels + rng.normal(0.0, noise_sigma, pixels.shape)
    pixels = np.clip(pixels, 0.0, 1.0)
    return Frame(pixels=pixels, pose_reported=pose_true, pose_true=pose_true,
                 timestamp=time)


def _trunk_hit(pos: np.ndarray, ground: np.ndarray, occ) -> np.ndarray:
    """Ray-cylinder test for a vertical trunk from z=0 to the crown height."""
    dx = ground[..., 0] - pos[0]
    dy = ground[..., 1] - pos[1]
    fx = pos[0] - occ.center[0]
    fy = pos[1] - occ.center[1]
    a = dx * dx + dy * dy
    b = 2.0 * (fx * dx + fy * dy)
    c = fx * fx + fy * fy - occ.trunk_radius ** 2
    disc = b * b - 4 * a * c
    hit = np.zeros(ground.shape[:2], dtype=bool)
    ok = (disc >= 0) & (a > 1e-18)
    if not ok.any():
        return hit
    sq = np.sqrt(np.where(ok, disc, 0.0))
    t1 = np.where(ok, (-b - sq) / np.where(ok, 2 * a, 1.0), np.inf)
    z = pos[2]
    z_at = z * (1.0 - t1)  # ray z at the first cylinder crossing
    hit[ok & (t1 >= 0) & (t1 <= 1) & (z_at <= occ.height) & (z_at >= 0)] = True
    return hit


def advance_drift(state: DriftState, seed, iteration: int) -> DriftState:
    """One compass-drift step: Gaussian random walk clamped to +/- bound."""
    if state.step_sigma > 0:
        key = (tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)) + (iteration,)
        rng = np.random.default_rng(key)
        step = rng.normal(0.0, state.step_sigma)
    else:
        step = 0.0
    err = min(max(state.heading_error + step, -state.bound), state.bound)
    return replace(state, heading_error=float(err))


def reported_pose(pose_true: Pose, drift: DriftState, pos_sigma: float = DEFAULT_POS_SIGMA,
                  seed=None) -> Pose:
    """What the drone believes: heading offset by the drift error, position
    perturbed by RTK-scale Gaussian noise."""
    if pos_sigma > 0:
        rng = np.random.default_rng(seed)
        dx, dy, dz = rng.normal(0.0, pos_sigma, 3)
    else:
        dx = dy = dz = 0.0
    x, y, z = pose_true.position
    return Pose(position=(x + dx, y + dy, max(z + dz, 1e-6)),
                heading=pose_true.heading + drift.heading_error)
