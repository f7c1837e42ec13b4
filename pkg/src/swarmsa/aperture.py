"""Synthetic-aperture integration on a parameterized focal plane.

Per-drone rasters are registered by intersecting each virtual-camera pixel ray
with the focal plane and projecting the hit point back into the drone's camera
(ray summation). Unknown sensor parameters (per-drone headings and the three
focal-plane parameters) are folded directly into the integral by averaging n
transformed copies per parameter instead of searching the parameter space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError, ProjectionError
from .geometry import heading_basis, half_tangent, pixel_axes, pixels_from_points
from .rx import AnomalyMask
from .sensor import CameraModel, Frame, Pose


@dataclass(frozen=True)
class FocalPlane:
    delta: float  # m below the virtual camera along its axis
    theta: float = 0.0  # tilt about east axis, degrees
    phi: float = 0.0  # tilt about north axis, degrees

    def __post_init__(self):
        if self.delta <= 0:
            raise ProjectionError("focal plane delta must be positive")


@dataclass(frozen=True)
class VirtualCamera:
    position: tuple[float, float, float]
    heading: float
    fov: float  # identical to the drone cameras' FOV
    resolution: tuple[int, int]

    @property
    def pixel_pitch(self) -> float:
        """Ground extent of one pixel on a fronto-parallel plane at delta=z."""
        return 2.0 * self.position[2] * half_tangent(self.fov) / self.resolution[0]

    def pitch_at(self, plane: FocalPlane) -> float:
        return 2.0 * plane.delta * half_tangent(self.fov) / self.resolution[0]


@dataclass(frozen=True)
class IntegrationConfig:
    n: int = 10  # steps per unknown parameter
    heading_range: float = 5.0  # +/- degrees
    delta_range: float = 0.0  # +/- m
    theta_range: float = 0.0  # +/- degrees
    phi_range: float = 0.0  # +/- degrees
    normalize_by_n: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("integration steps n must be >= 1")
        for name in ("heading_range", "delta_range", "theta_range", "phi_range"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class IntegralImage:
    values: np.ndarray  # (H, W) in [0, 1] for anomaly integrals, (H, W, C) for signal
    plane: FocalPlane
    vcam: VirtualCamera
    n_drones: int
    layer_count: int  # transformed-raster integrations performed


@dataclass(frozen=True)
class Layer:
    values: np.ndarray  # sampled raster on the virtual-camera grid
    present: np.ndarray  # (H, W) bool, False where out of the drone's frustum


def parameter_offsets(n: int, prange: float) -> np.ndarray:
    """n uniform steps covering +/- prange, endpoints inclusive on the negative
    side: n=10, range 5 gives -5, -4, ..., +4."""
    if prange == 0.0:
        return np.zeros(n)
    step = 2.0 * prange / n
    return -prange + step * np.arange(n)


def plane_points(vcam: VirtualCamera, plane: FocalPlane) -> np.ndarray:
    """World hit points (H, W, 3) of every virtual-camera pixel ray on the plane."""
    w, h = vcam.resolution
    right, forward = heading_basis(vcam.heading)
    tanf = half_tangent(vcam.fov)
    a, b = pixel_axes(w, h)
    # ray direction per pixel: lateral offsets plus straight down
    dx = tanf * (np.outer(np.ones(h), a) * right[0] - np.outer(b, np.ones(w)) * forward[0])
    dy = tanf * (np.outer(np.ones(h), a) * right[1] - np.outer(b, np.ones(w)) * forward[1])
    dz = -np.ones((h, w))

    theta = math.radians(plane.theta)
    phi = math.radians(plane.phi)
    # plane normal: z-up rotated about east (theta) then north (phi)
    n_vec = np.array([
        math.sin(phi) * math.cos(theta),
        -math.sin(theta) * math.cos(phi),
        math.cos(theta) * math.cos(phi),
    ])
    o = np.array(vcam.position)
    p0 = o + plane.delta * np.array([0.0, 0.0, -1.0])

    if abs(n_vec[2]) < 1e-9:
        raise ProjectionError("focal plane is parallel to the virtual camera axis")
    denom = dx * n_vec[0] + dy * n_vec[1] + dz * n_vec[2]
    denom = np.where(np.abs(denom) < 1e-12, np.nan, denom)
    t = np.dot(p0 - o, n_vec) / denom
    pts = np.empty((h, w, 3))
    pts[..., 0] = o[0] + t * dx
    pts[..., 1] = o[1] + t * dy
    pts[..., 2] = o[2] + t * dz
    return pts


def _raster_array(raster) -> tuple[np.ndarray, bool]:
    """Return (array, is_mask). Masks sample nearest-neighbor, frames bilinear."""
    if isinstance(raster, AnomalyMask):
        return raster.flags.astype(float), True
    if isinstance(raster, Frame):
        return raster.pixels, False
    arr = np.asarray(raster)
    return arr.astype(float), arr.dtype == bool


def sample_points(raster, pose: Pose, camera: CameraModel, points: np.ndarray,
                  heading_offset: float = 0.0) -> Layer:
    """Sample a drone raster at world points via the drone's (reported) camera."""
    arr, is_mask = _raster_array(raster)
    h, w = arr.shape[:2]
    if (w, h) != camera.resolution:
        raise DimensionError(
            f"raster {arr.shape[1]}x{arr.shape[0]} does not match camera {camera.resolution}")
    uv, in_front = pixels_from_points(
        points, np.array(pose.position), pose.heading + heading_offset,
        camera.fov, w, h)
    u, v = uv[..., 0], uv[..., 1]
    finite = np.isfinite(u) & np.isfinite(v) & in_front

    if is_mask:
        ui = np.rint(np.where(finite, u, 0)).astype(int)
        vi = np.rint(np.where(finite, v, 0)).astype(int)
        present = finite & (ui >= 0) & (ui < w) & (vi >= 0) & (vi < h)
        ui = np.clip(ui, 0, w - 1)
        vi = np.clip(vi, 0, h - 1)
        values = np.where(present, arr[vi, ui], 0.0)
        return Layer(values=values, present=present)

    present = finite & (u >= 0) & (u <= w - 1) & (v >= 0) & (v <= h - 1)
    u0 = np.clip(np.floor(np.where(finite, u, 0)).astype(int), 0, w - 2)
    v0 = np.clip(np.floor(np.where(finite, v, 0)).astype(int), 0, h - 2)
    fu = np.clip(np.where(finite, u, 0) - u0, 0.0, 1.0)[..., None]
    fv = np.clip(np.where(finite, v, 0) - v0, 0.0, 1.0)[..., None]
    vals = (arr[v0, u0] * (1 - fu) * (1 - fv) + arr[v0, u0 + 1] * fu * (1 - fv)
            + arr[v0 + 1, u0] * (1 - fu) * fv + arr[v0 + 1, u0 + 1] * fu * fv)
    vals = np.where(present[..., None], vals, 0.0)
    return Layer(values=vals, present=present)


def project_layer(raster, reported_pose: Pose, camera: CameraModel, plane: FocalPlane,
                  vcam: VirtualCamera, heading_offset: float = 0.0) -> Layer:
    """Register one drone raster onto the focal plane as seen by the virtual
    camera, with an extra heading offset folded into the reported pose."""
    points = plane_points(vcam, plane)
    return sample_points(raster, reported_pose, camera, points, heading_offset)


def integrate(layers) -> np.ndarray:
    """Per-pixel mean over present samples; pixels absent everywhere become 0."""
    layers = list(layers)
    if not layers:
        raise ValueError("integrate requires at least one layer")
    shape = layers[0].values.shape
    total = np.zeros(shape)
    count = np.zeros(shape[:2])
    for layer in layers:
        if layer.values.shape != shape:
            raise DimensionError("layer dimensions differ")
        if total.ndim == 3:
            total += layer.values * layer.present[..., None]
        else:
            total += layer.values * layer.present
        count += layer.present
    safe = np.maximum(count, 1.0)
    return total / (safe[..., None] if total.ndim == 3 else safe)


def _composite(masks, poses, camera, points) -> Layer:
    """Mean of all drones projected (nominal headings) onto one offset plane."""
    shape = None
    total = count = None
    for mask, pose in zip(masks, poses):
        layer = sample_points(mask, pose, camera, points)
        if total is None:
            shape = layer.values.shape
            total = np.zeros(shape)
            count = np.zeros(shape[:2])
        total += layer.values * layer.present
        count += layer.present
    values = total / np.maximum(count, 1.0)
    return Layer(values=values, present=count > 0)


def parameter_integrate(masks, reported_poses, camera: CameraModel,
                        nominal_plane: FocalPlane, vcam: VirtualCamera,
                        cfg: IntegrationConfig) -> IntegralImage:
    """Integrate (N+3)n transformed rasters: n heading offsets per drone at the
    nominal plane, plus n composite layers per focal-plane parameter.

    A perfectly registered, everywhere-anomalous focal-plane point attains 1.0;
    contributions from wrong offsets are suppressed because fewer drones
    contribute there.
    """
    masks = list(masks)
    poses = list(reported_poses)
    if not masks:
        raise ValueError("parameter_integrate requires at least one mask")
    if len(masks) != len(poses):
        raise ValueError(f"{len(masks)} masks but {len(poses)} poses")
    n_drones = len(masks)
    n = cfg.n

    nominal_points = plane_points(vcam, nominal_plane)
    w, h = vcam.resolution
    total = np.zeros((h, w))
    count = np.zeros((h, w))

    # group (a): per-drone heading offsets at the nominal plane
    for mask, pose in zip(masks, poses):
        for off in parameter_offsets(n, cfg.heading_range):
            layer = sample_points(mask, pose, camera, nominal_points, float(off))
            total += layer.values * layer.present
            count += layer.present

    # group (b): composite layers on offset planes, nominal headings. A
    # zero-range parameter has a single considered option which group (a)
    # already covers at the nominal plane; emitting n duplicate composites
    # for it would only bias the integral toward the misregistered solution.
    layer_count = n_drones * n
    for param, prange in (("delta", cfg.delta_range), ("theta", cfg.theta_range),
                          ("phi", cfg.phi_range)):
        if prange == 0.0:
            continue
        for off in parameter_offsets(n, prange):
            shifted = replace(nominal_plane, **{param: getattr(nominal_plane, param) + float(off)})
            points = plane_points(vcam, shifted)
            layer = _composite(masks, poses, camera, points)
            total += layer.values * layer.present
            count += layer.present
            layer_count += 1

    values = total / np.maximum(count, 1.0)
    assert values.min() >= 0.0 and values.max() <= 1.0 + 1e-12
    return IntegralImage(values=np.clip(values, 0.0, 1.0), plane=nominal_plane,
                         vcam=vcam, n_drones=n_drones,
                         layer_count=layer_count)


def anomaly_integral(masks, reported_poses, camera, plane, vcam) -> IntegralImage:
    """Plain (single-offset) anomaly integral, no parameter integration."""
    points = plane_points(vcam, plane)
    layers = [sample_points(m, p, camera, points) for m, p in zip(masks, reported_poses)]
    values = integrate(layers)
    return IntegralImage(values=values, plane=plane, vcam=vcam,
                         n_drones=len(layers), layer_count=len(layers))


def signal_integral(frames, reported_poses, camera, plane, vcam) -> IntegralImage:
    """Registered mean of raw signal frames (bilinear); display artifact."""
    points = plane_points(vcam, plane)
    layers = [sample_points(f, p, camera, points) for f, p in zip(frames, reported_poses)]
    values = integrate(layers)
    return IntegralImage(values=values, plane=plane, vcam=vcam,
                         n_drones=len(layers), layer_count=len(layers))
