"""Shared nadir-camera geometry.

Conventions: x east, y north, z up (ground plane z=0). Headings are degrees
clockwise from north. All cameras look straight down with a square frustum;
image "up" (decreasing row) points along the drone's forward direction.
"""

from __future__ import annotations

import math

import numpy as np


def heading_basis(heading_deg: float) -> tuple[np.ndarray, np.ndarray]:
    """Return (right, forward) ground unit vectors for a heading."""
    psi = math.radians(heading_deg)
    forward = np.array([math.sin(psi), math.cos(psi)])
    right = np.array([math.cos(psi), -math.sin(psi)])
    return right, forward


def half_tangent(fov_deg: float) -> float:
    return math.tan(math.radians(fov_deg) / 2.0)


def pixel_axes(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Normalized pixel-center coordinates in [-1, 1) along u (cols) and v (rows)."""
    a = (2.0 * np.arange(width) + 1.0 - width) / width
    b = (2.0 * np.arange(height) + 1.0 - height) / height
    return a, b


def ground_grid(position: np.ndarray, heading_deg: float, fov_deg: float,
                width: int, height: int) -> np.ndarray:
    """Ground-plane (z=0) hit points of every pixel's central ray, shape (H, W, 2)."""
    right, forward = heading_basis(heading_deg)
    tanf = half_tangent(fov_deg)
    a, b = pixel_axes(width, height)
    z = position[2]
    off_u = (z * tanf) * np.outer(np.ones(height), a)
    off_v = (z * tanf) * np.outer(b, np.ones(width))
    pts = np.empty((height, width, 2))
    pts[..., 0] = position[0] + off_u * right[0] - off_v * forward[0]
    pts[..., 1] = position[1] + off_u * right[1] - off_v * forward[1]
    return pts


def pixels_from_points(points: np.ndarray, position: np.ndarray, heading_deg: float,
                       fov_deg: float, width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Project world points (..., 3) into fractional pixel coords of a nadir camera.

    Returns (uv, in_front): uv has shape (..., 2) in (col, row) order; in_front is
    True where the point lies below the camera (positive depth). Bounds are not
    checked here.
    """
    right, forward = heading_basis(heading_deg)
    tanf = half_tangent(fov_deg)
    rel_x = points[..., 0] - position[0]
    rel_y = points[..., 1] - position[1]
    depth = position[2] - points[..., 2]
    in_front = depth > 1e-9
    safe = np.where(in_front, depth, 1.0)
    a = (rel_x * right[0] + rel_y * right[1]) / (safe * tanf)
    b = -(rel_x * forward[0] + rel_y * forward[1]) / (safe * tanf)
    uv = np.empty(points.shape[:-1] + (2,))
    uv[..., 0] = (width * (a + 1.0) - 1.0) / 2.0
    uv[..., 1] = (height * (b + 1.0) - 1.0) / 2.0
    return uv, in_front


def ground_footprint_halfwidth(altitude: float, fov_deg: float) -> float:
    return altitude * half_tangent(fov_deg)
