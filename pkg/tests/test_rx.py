"""Anomaly detector: dense-evaluation oracle, regularization, deterministic
top-fraction thresholding."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from swarmsa.errors import DimensionError
from swarmsa.rx import rx_scores, rx_stats, top_fraction_mask


def dense_scores(pixels: np.ndarray) -> np.ndarray:
    """Straight per-pixel oracle: explicit mean/covariance and a python loop."""
    if pixels.ndim == 2:
        pixels = pixels[..., None]
    h, w, c = pixels.shape
    flat = pixels.reshape(-1, c)
    mean = flat.mean(axis=0)
    cov = np.zeros((c, c))
    for row in flat:
        d = row - mean
        cov += np.outer(d, d)
    cov /= flat.shape[0]
    eps = max(1e-6 * np.trace(cov) / c, 1e-12)
    k_inv = np.linalg.inv(cov + eps * np.eye(c))
    out = np.empty((h, w))
    for i in range(h):
        for j in range(w):
            d = pixels[i, j] - mean
            out[i, j] = float(d @ k_inv @ d)
    return out


class TestScores:
    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(0)
        for channels in (1, 2, 3):
            pixels = rng.uniform(0, 1, (9, 7, channels))
            got = rx_scores(pixels, rx_stats(pixels))
            assert np.allclose(got, dense_scores(pixels), rtol=1e-9, atol=1e-12)

    def test_two_dim_input_treated_as_single_channel(self):
        rng = np.random.default_rng(1)
        gray = rng.uniform(0, 1, (6, 6))
        assert np.allclose(rx_scores(gray, rx_stats(gray)),
                           rx_scores(gray[..., None], rx_stats(gray[..., None])))

    def test_constant_frame_well_defined(self):
        flat = np.full((8, 8, 3), 0.5)
        scores = rx_scores(flat, rx_stats(flat))
        assert np.isfinite(scores).all()
        assert np.allclose(scores, 0.0)

    def test_single_outlier_scores_highest(self):
        pixels = np.full((8, 8, 1), 0.3)
        pixels[2, 5, 0] = 0.9
        scores = rx_scores(pixels, rx_stats(pixels))
        assert np.unravel_index(np.argmax(scores), scores.shape) == (2, 5)

    def test_channel_mismatch_rejected(self):
        rng = np.random.default_rng(2)
        stats = rx_stats(rng.uniform(0, 1, (5, 5, 3)))
        with pytest.raises(DimensionError):
            rx_scores(rng.uniform(0, 1, (5, 5, 1)), stats)

    def test_frame_object_accepted(self):
        class FakeFrame:
            pixels = np.random.default_rng(3).uniform(0, 1, (5, 5, 1))
        scores = rx_scores(FakeFrame, rx_stats(FakeFrame))
        assert scores.shape == (5, 5)

    @given(hnp.arrays(float, (6, 5, 2), elements=st.floats(0.0, 1.0, width=32)))
    @settings(max_examples=40, deadline=None)
    def test_scores_nonnegative(self, pixels):
        scores = rx_scores(pixels, rx_stats(pixels))
        assert (scores >= 0).all()

    def test_invariant_to_channel_offset(self):
        # Mahalanobis distance only sees deviations from the mean
        rng = np.random.default_rng(4)
        pixels = rng.uniform(0.2, 0.6, (7, 7, 2))
        shifted = np.clip(pixels + 0.2, 0, 1.2)
        a = rx_scores(pixels, rx_stats(pixels))
        b = rx_scores(shifted, rx_stats(shifted))
        assert np.allclose(a, b, rtol=1e-6)


class TestStats:
    def test_population_covariance(self):
        rng = np.random.default_rng(5)
        pixels = rng.uniform(0, 1, (4, 4, 2))
        stats = rx_stats(pixels)
        flat = pixels.reshape(-1, 2)
        assert np.allclose(stats.covariance, np.cov(flat.T, bias=True))
        assert np.allclose(stats.mean, flat.mean(axis=0))

    def test_regularization_scales_with_trace(self):
        rng = np.random.default_rng(6)
        pixels = rng.uniform(0, 1, (6, 6, 2))
        stats = rx_stats(pixels)
        assert math.isclose(stats.regularization,
                            1e-6 * np.trace(stats.covariance) / 2.0)

    def test_regularization_floor_for_constant_frames(self):
        stats = rx_stats(np.full((4, 4, 1), 0.7))
        assert stats.regularization == 1e-12


class TestTopFraction:
    def test_cardinality_exact(self):
        rng = np.random.default_rng(7)
        scores = rng.uniform(0, 1, (32, 32))
        for t in (0.9975, 0.99, 0.9, 0.5):
            mask = top_fraction_mask(scores, t)
            assert int(mask.flags.sum()) == math.floor((1 - t) * scores.size)
            assert mask.threshold_fraction == t

    def test_selects_highest_scores(self):
        scores = np.arange(16.0).reshape(4, 4)
        mask = top_fraction_mask(scores, 0.75)  # keep top 4
        assert mask.flags.sum() == 4
        assert mask.flags[3].all()  # the four largest live in the last row

    def test_ties_resolved_row_major(self):
        scores = np.ones((4, 4))
        mask = top_fraction_mask(scores, 0.75)
        expect = np.zeros(16, dtype=bool)
        expect[:4] = True  # first four pixels in row-major order
        assert np.array_equal(mask.flags.ravel(), expect)

    def test_zero_budget_empty_mask(self):
        scores = np.random.default_rng(8).uniform(0, 1, (4, 4))
        mask = top_fraction_mask(scores, 0.99)  # floor(0.01 * 16) == 0
        assert not mask.flags.any()

    def test_fraction_bounds_enforced(self):
        scores = np.ones((4, 4))
        for bad in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(ValueError):
                top_fraction_mask(scores, bad)

    @given(t=st.floats(0.01, 0.99),
           data=hnp.arrays(float, (8, 8), elements=st.floats(0.0, 1.0, width=32)))
    @settings(max_examples=40, deadline=None)
    def test_flagged_scores_dominate_unflagged(self, t, data):
        mask = top_fraction_mask(data, t)
        if mask.flags.any() and (~mask.flags).any():
            assert data[mask.flags].min() >= data[~mask.flags].max() - 1e-12
        assert int(mask.flags.sum()) == math.floor((1 - t) * data.size)
