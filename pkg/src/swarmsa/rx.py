"""Reed-Xiaoli anomaly detection: per-pixel Mahalanobis score against global
image statistics, then top-fraction binarization with deterministic ties."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True)
class RxStats:
    mean: np.ndarray  # (C,) spectral mean of the background
    covariance: np.ndarray  # (C, C) population covariance
    regularization: float  # epsilon added to the diagonal before inversion


@dataclass(frozen=True)
class AnomalyMask:
    flags: np.ndarray  # (H, W) bool
    threshold_fraction: float  # retained-background fraction t


def _as_array(frame) -> np.ndarray:
    pixels = getattr(frame, "pixels", frame)
    arr = np.asarray(pixels, dtype=float)
    if arr.ndim == 2:
        arr = arr[..., None]
    if arr.ndim != 3:
        raise DimensionError(f"expected (H, W, C) pixels, got shape {arr.shape}")
    return arr


def rx_stats(frame) -> RxStats:
    """Global background statistics: per-channel mean, population covariance,
    trace-scaled diagonal regularization (keeps constant frames invertible)."""
    arr = _as_array(frame)
    flat = arr.reshape(-1, arr.shape[2])
    mean = flat.mean(axis=0)
    centered = flat - mean
    cov = centered.T @ centered / flat.shape[0]
    channels = arr.shape[2]
    # absolute floor keeps constant (zero-trace) frames invertible
    eps = max(1e-6 * np.trace(cov) / channels, 1e-12)
    return RxStats(mean=mean, covariance=cov, regularization=float(eps))


def rx_scores(frame, stats: RxStats) -> np.ndarray:
    """Mahalanobis score of each pixel against the background statistics."""
    arr = _as_array(frame)
    channels = arr.shape[2]
    if stats.mean.shape[0] != channels:
        raise DimensionError(
            f"stats computed for {stats.mean.shape[0]} channel(s), frame has {channels}")
    k_reg = stats.covariance + stats.regularization * np.eye(channels)
    k_inv = np.linalg.inv(k_reg)
    centered = arr.reshape(-1, channels) - stats.mean
    scores = np.einsum("ij,jk,ik->i", centered, k_inv, centered)
    scores = np.maximum(scores, 0.0).reshape(arr.shape[:2])
    assert (scores >= 0).all()
    return scores


def top_fraction_mask(scores: np.ndarray, t: float) -> AnomalyMask:
    """Flag exactly floor((1-t) * P) pixels with the highest scores.

    Ties at the cut are broken by row-major pixel order so replays are
    bit-identical.
    """
    if not (0.0 < t < 1.0):
        raise ValueError("t must be a retained-background fraction in (0, 1)")
    flat = scores.ravel()
    k = math.floor((1.0 - t) * flat.size)
    flags = np.zeros(flat.size, dtype=bool)
    if k > 0:
        order = np.argsort(-flat, kind="stable")  # desc score, row-major ties
        flags[order[:k]] = True
    return AnomalyMask(flags=flags.reshape(scores.shape), threshold_fraction=t)
