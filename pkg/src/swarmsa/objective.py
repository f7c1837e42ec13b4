"""From anomaly integral to decision: visibility-floor filtering, blob
extraction, geometric pre-filtering, relevance, and the two-cluster confidence
ratio."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .aperture import (FocalPlane, IntegralImage, VirtualCamera,
                       parameter_integrate, plane_points)

DEFAULT_V_MIN = 0.125  # midpoint of the 10-14% low-visibility band

_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


@dataclass(frozen=True)
class Blob:
    pixels: np.ndarray  # (K, 2) row-major (row, col) indices
    area: int  # px
    relevance: float  # sum of integral values over the pixel set
    centroid_px: tuple[float, float]  # (col s, row t), value-weighted
    centroid_ground: tuple[float, float]  # world xy, m
    axis_lengths: tuple[float, float]  # (major, minor), m
    bbox_px: tuple[int, int, int, int]  # (row0, col0, row1, col1), inclusive

    @property
    def axis_ratio(self) -> float:
        major, minor = self.axis_lengths
        return major / minor if minor > 1e-12 else math.inf


@dataclass(frozen=True)
class BlobConstraints:
    min_area: float = 0.0  # m^2 on the focal plane
    max_area: float = math.inf  # m^2
    max_axis_ratio: float = math.inf
    v_min: float = DEFAULT_V_MIN

    def __post_init__(self):
        if not (0.0 < self.v_min < 1.0):
            raise ValueError("v_min must lie in (0, 1)")
        if self.min_area > self.max_area:
            raise ValueError("min_area must not exceed max_area")


@dataclass(frozen=True)
class Observation:
    best_blob: Blob | None
    confidence: float
    confidences: tuple[float, ...] = ()
    reference_index: int = 0
    integral: IntegralImage | None = field(default=None, compare=False)


def find_blobs(integral: IntegralImage, v_min: float = DEFAULT_V_MIN) -> list[Blob]:
    """Binarize at v_min and extract 8-connected components.

    Relevance sums the pre-binarization integral values; centroids are
    value-weighted; axis lengths come from second moments converted to meters
    via the focal-plane pixel pitch.
    """
    values = integral.values
    binary = values >= v_min
    labels, n_labels = ndimage.label(binary, structure=_EIGHT_CONNECTED)
    if n_labels == 0:
        return []
    pitch = integral.vcam.pitch_at(integral.plane)
    world = plane_points(integral.vcam, integral.plane)
    blobs = []
    for obj_idx, sl in enumerate(ndimage.find_objects(labels), start=1):
        region = labels[sl] == obj_idx
        rows, cols = np.nonzero(region)
        rows = rows + sl[0].start
        cols = cols + sl[1].start
        vals = values[rows, cols]
        relevance = float(vals.sum())
        wsum = relevance if relevance > 0 else len(rows)
        weights = vals if relevance > 0 else np.ones_like(vals)
        c_col = float((weights * cols).sum() / wsum)
        c_row = float((weights * rows).sum() / wsum)
        gx = float((weights * world[rows, cols, 0]).sum() / wsum)
        gy = float((weights * world[rows, cols, 1]).sum() / wsum)
        # principal axes of the weighted pixel distribution, in meters
        dc = cols - c_col
        dr = rows - c_row
        cov = np.array([
            [(weights * dc * dc).sum(), (weights * dc * dr).sum()],
            [(weights * dc * dr).sum(), (weights * dr * dr).sum()],
        ]) / wsum
        eigvals = np.clip(np.linalg.eigvalsh(cov), 0.0, None)
        minor, major = (4.0 * np.sqrt(eigvals) * pitch).tolist()
        # a single pixel still has one pitch of physical extent
        major = max(major, pitch)
        minor = max(minor, pitch)
        blobs.append(Blob(
            pixels=np.column_stack([rows, cols]),
            area=int(len(rows)),
            relevance=relevance,
            centroid_px=(c_col, c_row),
            centroid_ground=(gx, gy),
            axis_lengths=(major, minor),
            bbox_px=(int(rows.min()), int(cols.min()), int(rows.max()), int(cols.max())),
        ))
    return blobs


def prefilter_blobs(blobs, constraints: BlobConstraints, pitch: float) -> list[Blob]:
    """Drop blobs that are unrealistically small/large or badly elongated."""
    px_area = pitch * pitch
    kept = []
    for blob in blobs:
        area_m2 = blob.area * px_area
        if area_m2 < constraints.min_area or area_m2 > constraints.max_area:
            continue
        if blob.axis_ratio > constraints.max_axis_ratio:
            continue
        kept.append(blob)
    return kept


def _relevance_floor(constraints: BlobConstraints, pitch: float) -> float:
    """Smallest admissible relevance: visibility floor times the minimum blob
    size in pixels. Keeps the single-blob confidence finite and comparable to T."""
    min_px = max(1, math.ceil(constraints.min_area / (pitch * pitch)))
    return constraints.v_min * min_px


def evaluate(integral: IntegralImage,
             constraints: BlobConstraints = BlobConstraints()) -> tuple[Blob | None, float]:
    """Most relevant admissible blob and the two-cluster confidence ratio."""
    pitch = integral.vcam.pitch_at(integral.plane)
    blobs = prefilter_blobs(find_blobs(integral, constraints.v_min), constraints, pitch)
    if not blobs:
        return None, 0.0
    blobs.sort(key=lambda b: -b.relevance)
    r1 = blobs[0].relevance
    if len(blobs) >= 2:
        return blobs[0], r1 / blobs[1].relevance
    return blobs[0], r1 / _relevance_floor(constraints, pitch)


def multi_reference_evaluate(masks, reported_poses, camera, plane, cfg,
                             constraints: BlobConstraints = BlobConstraints()) -> Observation:
    """Evaluate the parameter integral from every drone's reference perspective
    and keep the most confident one (ties to the lowest drone index).

    `plane` may be None, in which case each reference focuses on the ground
    plane at its own reported altitude.
    """
    poses = list(reported_poses)
    masks = list(masks)
    best = None
    confidences = []
    for i, pose in enumerate(poses):
        ref_plane = plane if plane is not None else FocalPlane(delta=pose.position[2])
        vcam = VirtualCamera(position=pose.position, heading=pose.heading,
                             fov=camera.fov, resolution=camera.resolution)
        integral = parameter_integrate(masks, poses, camera, ref_plane, vcam, cfg)
        blob, conf = evaluate(integral, constraints)
        confidences.append(conf)
        if best is None or conf > best.confidence:
            best = Observation(best_blob=blob, confidence=conf,
                               reference_index=i, integral=integral)
    return Observation(best_blob=best.best_blob, confidence=best.confidence,
                       confidences=tuple(confidences),
                       reference_index=best.reference_index,
                       integral=best.integral)


def blob_ground_position(blob: Blob, vcam: VirtualCamera, plane: FocalPlane) -> tuple[float, float]:
    """Map a blob's (s, t) centroid through the focal-plane parameterization to
    world ground coordinates (bilinear between the four surrounding rays)."""
    world = plane_points(vcam, plane)
    h, w = world.shape[:2]
    u, v = blob.centroid_px
    u0 = int(np.clip(math.floor(u), 0, w - 2))
    v0 = int(np.clip(math.floor(v), 0, h - 2))
    fu = np.clip(u - u0, 0.0, 1.0)
    fv = np.clip(v - v0, 0.0, 1.0)
    pt = (world[v0, u0] * (1 - fu) * (1 - fv) + world[v0, u0 + 1] * fu * (1 - fv)
          + world[v0 + 1, u0] * (1 - fu) * fv + world[v0 + 1, u0 + 1] * fu * fv)
    return float(pt[0]), float(pt[1])
