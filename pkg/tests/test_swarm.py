"""Swarm controller: aperture geometry, spacing enforcement, slot assignment,
branch selection, guided follow."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmsa.errors import ConfigurationError, PackingTableError
from swarmsa.objective import Blob, Observation
from swarmsa.swarm import (Hyperparameters, Mode, altitude_gap, altitude_offsets,
                           assign_slots, diverge_step, guided_follow,
                           initial_state, line_slots, min_pairwise_distance,
                           pso_step, rutherford_scatter, sa_diameter,
                           stack_height)


def make_hyper(**overrides):
    base = dict(c1=1.0, c2=2.0, c3=1.0, c4=4.0, c5=0.3, s=4.5, sd=0.0,
                t_conf=2.0, n_drones=4, fov=40.0)
    base.update(overrides)
    return Hyperparameters(**base)


def blob_at(xy, relevance=5.0):
    return Blob(pixels=np.zeros((1, 2), dtype=int), area=1, relevance=relevance,
                centroid_px=(0.0, 0.0), centroid_ground=tuple(map(float, xy)),
                axis_lengths=(1.0, 1.0), bbox_px=(0, 0, 0, 0))


def obs_at(xy, confidence, reference_index=0):
    return Observation(best_blob=blob_at(xy), confidence=confidence,
                       confidences=(confidence,), reference_index=reference_index)


class TestApertureGeometry:
    def test_six_drone_diameter(self):
        assert math.isclose(sa_diameter(5.15, 6), 15.45)

    def test_two_drone_diameter(self):
        assert math.isclose(sa_diameter(3.0, 2), 6.0)

    def test_three_drone_ratio(self):
        assert math.isclose(sa_diameter(1.0, 3), 1.0 + 2.0 / math.sqrt(3.0))

    def test_untabulated_count_rejected(self):
        with pytest.raises(PackingTableError):
            sa_diameter(3.0, 14)
        with pytest.raises(PackingTableError):
            sa_diameter(3.0, 1)

    def test_altitude_gap_formula(self):
        got = altitude_gap(5.0, 6, 40.0, safety_margin=0.2)
        expect = 5.0 / 5.0 / math.tan(math.radians(20.0)) + 0.2
        assert math.isclose(got, expect)

    def test_stack_height(self):
        assert stack_height(6, 2.0) == 10.0
        assert stack_height(1, 2.0) == 0.0

    def test_offsets_are_multiples_of_gap(self):
        offsets = altitude_offsets(4, 5.0, 40.0)
        dh = altitude_gap(5.0, 4, 40.0)
        assert np.allclose(offsets, dh * np.arange(4))


class TestHyperparameters:
    def test_exploration_bounded_by_exploitation(self):
        with pytest.raises(ConfigurationError):
            make_hyper(c1=3.0, c2=2.0)

    def test_step_bounded_by_spacing(self):
        with pytest.raises(ConfigurationError):
            make_hyper(c1=2.0, c2=3.0, c4=4.0)

    def test_smoothness_range(self):
        for bad in (-0.1, 1.1):
            with pytest.raises(ConfigurationError):
                make_hyper(c5=bad)
        make_hyper(c5=0.0)
        make_hyper(c5=1.0)

    def test_confidence_threshold_must_exceed_one(self):
        with pytest.raises(ConfigurationError):
            make_hyper(t_conf=1.0)

    def test_sd_vector(self):
        assert np.allclose(make_hyper(sd=90.0).sd_vector, [1.0, 0.0], atol=1e-12)
        assert np.allclose(make_hyper(sd=0.0).sd_vector, [0.0, 1.0], atol=1e-12)


class TestScatter:
    @given(seed=st.integers(0, 100), n=st.integers(2, 6))
    @settings(max_examples=40, deadline=None)
    def test_minimum_spacing_enforced(self, seed, n):
        rng = np.random.default_rng(seed)
        pts = np.column_stack([rng.uniform(-3, 3, (n, 2)), np.full(n, 30.0)])
        out = rutherford_scatter(pts, 4.0, seed=seed)
        assert min_pairwise_distance(out) >= 4.0

    def test_coincident_points_separate(self):
        pts = np.zeros((3, 3))
        out = rutherford_scatter(pts, 2.0, seed=1)
        assert min_pairwise_distance(out) >= 2.0

    def test_already_spaced_untouched(self):
        pts = np.array([[0.0, 0.0, 30.0], [10.0, 0.0, 30.0]])
        assert np.array_equal(rutherford_scatter(pts, 4.0), pts)

    def test_altitudes_preserved(self):
        pts = np.array([[0.0, 0.0, 30.0], [0.5, 0.0, 33.0]])
        out = rutherford_scatter(pts, 4.0)
        assert np.array_equal(out[:, 2], pts[:, 2])

    def test_deterministic(self):
        pts = np.zeros((4, 3))
        a = rutherford_scatter(pts, 3.0, seed=7)
        b = rutherford_scatter(pts, 3.0, seed=7)
        assert np.array_equal(a, b)


class TestLineSlots:
    def test_orthogonal_to_scan_direction(self):
        slots = line_slots(np.array([0.0, 0.0]), np.array([0.0, 1.0]), 4.5, 3)
        assert np.allclose(slots[:, 1], 0.0)  # north-going scan: east-west line
        assert np.allclose(np.diff(slots[:, 0]), -4.5)

    def test_centered_on_center(self):
        slots = line_slots(np.array([2.0, -1.0]), np.array([1.0, 0.0]), 3.0, 4)
        assert np.allclose(slots.mean(axis=0), [2.0, -1.0])

    def test_spacing_magnitude(self):
        slots = line_slots(np.zeros(2), np.array([0.6, 0.8]), 2.5, 5)
        gaps = np.linalg.norm(np.diff(slots, axis=0), axis=1)
        assert np.allclose(gaps, 2.5)


class TestAssignSlots:
    def oracle(self, pts, slots):
        best, best_cost = None, math.inf
        for perm in itertools.permutations(range(len(slots))):
            cost = sum(np.linalg.norm(pts[i] - slots[perm[i]]) for i in range(len(pts)))
            if cost < best_cost:
                best, best_cost = perm, cost
        return best_cost

    @given(seed=st.integers(0, 200), n=st.integers(2, 6))
    @settings(max_examples=30, deadline=None)
    def test_matches_brute_force_cost(self, seed, n):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-10, 10, (n, 2))
        slots = rng.uniform(-10, 10, (n, 2))
        order = assign_slots(pts, slots)
        assert sorted(order) == list(range(n))
        cost = sum(np.linalg.norm(pts[i] - slots[order[i]]) for i in range(n))
        assert cost <= self.oracle(pts, slots) + 1e-9

    def test_identity_when_on_slots(self):
        slots = np.array([[0.0, 0.0], [5.0, 0.0], [10.0, 0.0]])
        assert np.array_equal(assign_slots(slots.copy(), slots), [0, 1, 2])


class TestPsoStep:
    def test_divergence_without_observation(self):
        hyper = make_hyper()
        state = initial_state(hyper, (0.0, 0.0), 30.0)
        out = pso_step(state, None, hyper, seed=0)
        assert out.mode is Mode.SCANNING
        assert out.iteration == 1
        assert min_pairwise_distance(out.positions) >= hyper.c4 - 1e-9

    def test_divergence_advances_along_scan_direction(self):
        hyper = make_hyper(c5=1.0, sd=0.0)
        state = initial_state(hyper, (0.0, 0.0), 30.0)
        out = pso_step(state, None, hyper, seed=0)
        assert out.centroid[1] > state.centroid[1]  # north

    def test_low_confidence_stays_scanning(self):
        hyper = make_hyper(t_conf=2.0)
        state = initial_state(hyper, (0.0, 0.0), 30.0)
        out = pso_step(state, obs_at((1.0, 1.0), confidence=1.5), hyper, seed=0)
        assert out.mode is Mode.SCANNING
        assert not out.ever_detected

    def test_confident_observation_converges(self):
        hyper = make_hyper()
        state = initial_state(hyper, (0.0, 0.0), 30.0)
        out = pso_step(state, obs_at((3.0, 3.0), confidence=5.0), hyper, seed=0)
        assert out.mode is Mode.TRACKING
        assert out.ever_detected
        assert out.track_history[-1] == (0, (3.0, 3.0))
        assert min_pairwise_distance(out.positions) >= hyper.c4 - 1e-9

    def test_track_history_updates_speed_and_direction(self):
        hyper = make_hyper()
        state = initial_state(hyper, (0.0, 0.0), 30.0)
        s1 = pso_step(state, obs_at((0.0, 0.0), 5.0), hyper, seed=0)
        s2 = pso_step(s1, obs_at((2.0, 0.0), 5.0), hyper, seed=0)
        assert math.isclose(s2.c3_current, 2.0)  # 2 m over 1 iteration
        assert np.allclose(s2.sd, [1.0, 0.0])  # towards east

    def test_lost_target_scans_towards_last_sighting(self):
        hyper = make_hyper()
        state = initial_state(hyper, (0.0, 0.0), 30.0)
        s1 = pso_step(state, obs_at((0.0, 20.0), 5.0), hyper, seed=0)
        s2 = pso_step(s1, None, hyper, seed=0)
        assert s2.mode is Mode.SCANNING
        vec = np.array([0.0, 20.0]) - s1.centroid
        assert np.allclose(s2.sd, vec / np.linalg.norm(vec))

    def test_deterministic_per_seed(self):
        hyper = make_hyper()
        state = initial_state(hyper, (0.0, 0.0), 30.0)
        a = pso_step(state, obs_at((3.0, 1.0), 5.0), hyper, seed=4)
        b = pso_step(state, obs_at((3.0, 1.0), 5.0), hyper, seed=4)
        c = pso_step(state, obs_at((3.0, 1.0), 5.0), hyper, seed=5)
        assert np.array_equal(a.positions, b.positions)
        assert not np.array_equal(a.positions, c.positions)

    def test_altitudes_never_change(self):
        hyper = make_hyper()
        state = initial_state(hyper, (0.0, 0.0), 30.0)
        out = state
        for it in range(3):
            obs = obs_at((it * 2.0, 0.0), 5.0) if it % 2 else None
            out = pso_step(out, obs, hyper, seed=1)
        assert np.array_equal(out.positions[:, 2], state.positions[:, 2])


class TestGuidedFollow:
    def test_translates_centroid_to_guide(self):
        state = initial_state(make_hyper(), (0.0, 0.0), 30.0)
        out, followed = guided_follow(state, (5.0, -3.0))
        assert followed
        assert out.mode is Mode.GUIDED
        assert np.allclose(out.centroid, [5.0, -3.0])

    def test_translation_is_rigid(self):
        state = initial_state(make_hyper(), (0.0, 0.0), 30.0)
        out, _ = guided_follow(state, (7.0, 2.0))
        before = state.positions[:, :2] - state.centroid
        after = out.positions[:, :2] - out.centroid
        assert np.allclose(before, after)
        assert np.array_equal(out.positions[:, 2], state.positions[:, 2])

    def test_stationary_guide_hands_back_control(self):
        state = initial_state(make_hyper(), (0.0, 0.0), 30.0)
        s1, f1 = guided_follow(state, (5.0, 5.0))
        s2, f2 = guided_follow(s1, (5.0, 5.0))
        assert f1 and not f2
        assert np.array_equal(s2.positions, s1.positions)

    def test_small_move_below_epsilon_ignored(self):
        state = initial_state(make_hyper(), (0.0, 0.0), 30.0)
        s1, _ = guided_follow(state, (5.0, 5.0))
        _, followed = guided_follow(s1, (5.0, 5.05), move_epsilon=0.1)
        assert not followed


class TestInitialState:
    def test_line_formation_with_spacing(self):
        hyper = make_hyper(n_drones=5, s=4.5, sd=0.0)
        state = initial_state(hyper, (0.0, -5.0), 30.0)
        assert state.positions.shape == (5, 3)
        assert np.allclose(state.centroid, [0.0, -5.0])
        assert np.allclose(state.positions[:, 1], -5.0)
        gaps = np.abs(np.diff(np.sort(state.positions[:, 0])))
        assert np.allclose(gaps, 4.5)

    def test_stacked_altitudes(self):
        hyper = make_hyper(n_drones=4, c4=5.0, fov=40.0)
        state = initial_state(hyper, (0.0, 0.0), 35.0)
        dh = altitude_gap(5.0, 4, 40.0)
        assert np.allclose(np.sort(state.positions[:, 2]), 35.0 + dh * np.arange(4))
        assert np.allclose(np.sort(state.altitude_offsets), dh * np.arange(4))

    def test_starts_scanning(self):
        state = initial_state(make_hyper(), (0.0, 0.0), 30.0)
        assert state.mode is Mode.SCANNING
        assert state.iteration == 0
        assert not state.ever_detected
