"""World model: forest generation, target track interpolation, serialization."""

import math

import numpy as np
import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmsa.errors import ConfigurationError
from swarmsa.scenario import (Rect, TargetTrack, generate_forest, load_scenario,
                              save_scenario, scenario_from_dict, scenario_to_dict,
                              target_bbox_corners, target_state)

from conftest import make_scenario


class TestRect:
    def test_area(self):
        r = Rect(-50.0, -50.0, 50.0, 50.0)
        assert r.area_m2 == 10_000.0
        assert r.area_ha == 1.0

    def test_degenerate_rejected(self):
        with pytest.raises(ConfigurationError):
            Rect(0.0, 0.0, 0.0, 5.0)

    def test_contains(self):
        r = Rect(0.0, 0.0, 10.0, 10.0)
        assert r.contains(5.0, 5.0)
        assert r.contains(0.0, 10.0)  # boundary inclusive
        assert not r.contains(-0.1, 5.0)


class TestForest:
    def test_density_honored_exactly(self):
        bounds = Rect(-50.0, -50.0, 50.0, 50.0)  # 1 ha
        trees = generate_forest(300.0, bounds, (1.0, 2.0), 20.0, seed=1)
        assert len(trees) == 300

    def test_fractional_hectares_round(self):
        bounds = Rect(0.0, 0.0, 60.0, 60.0)  # 0.36 ha
        trees = generate_forest(50.0, bounds, (1.0, 2.0), 20.0, seed=1)
        assert len(trees) == round(50.0 * 0.36)

    def test_deterministic_per_seed(self):
        bounds = Rect(-20.0, -20.0, 20.0, 20.0)
        a = generate_forest(120.0, bounds, (1.0, 2.0), 20.0, seed=9)
        b = generate_forest(120.0, bounds, (1.0, 2.0), 20.0, seed=9)
        c = generate_forest(120.0, bounds, (1.0, 2.0), 20.0, seed=10)
        assert a == b
        assert a != c

    def test_within_bounds_and_radius_range(self):
        bounds = Rect(-20.0, -10.0, 25.0, 15.0)
        for occ in generate_forest(200.0, bounds, (1.5, 2.5), 20.0, seed=2):
            assert bounds.contains(*occ.center)
            assert 1.5 <= occ.radius <= 2.5
            assert occ.height == 20.0

    def test_zero_density(self):
        assert generate_forest(0.0, Rect(0, 0, 100, 100), (1.0, 2.0), 20.0, 1) == ()


class TestTargetTrack:
    def test_waypoints_hit_exactly(self):
        track = TargetTrack(waypoints=((0.0, 1.0, 2.0), (10.0, 5.0, 2.0)),
                            bbox_size=(1.0, 1.0))
        c0, _ = target_state(track, 0.0)
        c1, _ = target_state(track, 10.0)
        assert np.allclose(c0, [1.0, 2.0])
        assert np.allclose(c1, [5.0, 2.0])

    def test_linear_interpolation(self):
        track = TargetTrack(waypoints=((0.0, 0.0, 0.0), (4.0, 8.0, 4.0)),
                            bbox_size=(1.0, 1.0))
        c, d = target_state(track, 1.0)
        assert np.allclose(c, [2.0, 1.0])
        assert np.allclose(d, np.array([8.0, 4.0]) / math.hypot(8.0, 4.0))

    def test_time_clamped_outside_span(self):
        track = TargetTrack(waypoints=((2.0, 1.0, 1.0), (4.0, 3.0, 1.0)),
                            bbox_size=(1.0, 1.0))
        before, _ = target_state(track, 0.0)
        after, _ = target_state(track, 99.0)
        assert np.allclose(before, [1.0, 1.0])
        assert np.allclose(after, [3.0, 1.0])

    def test_stationary_target_heads_north(self):
        track = TargetTrack(waypoints=((0.0, 4.0, -4.0),), bbox_size=(1.0, 1.0))
        c, d = target_state(track, 5.0)
        assert np.allclose(c, [4.0, -4.0])
        assert np.allclose(d, [0.0, 1.0])

    def test_heading_kept_through_pause(self):
        # motion east, then a stationary segment: heading stays east
        track = TargetTrack(waypoints=((0.0, 0.0, 0.0), (1.0, 2.0, 0.0), (5.0, 2.0, 0.0)),
                            bbox_size=(1.0, 1.0))
        _, d = target_state(track, 3.0)
        assert np.allclose(d, [1.0, 0.0])

    @given(t=st.floats(min_value=-5.0, max_value=25.0,
                       allow_nan=False, allow_infinity=False))
    @settings(max_examples=50, deadline=None)
    def test_interpolation_stays_on_polyline_bbox(self, t):
        track = TargetTrack(waypoints=((0.0, 0.0, -5.0), (10.0, 0.0, 5.0), (20.0, 5.0, 5.0)),
                            bbox_size=(1.0, 1.0))
        c, d = target_state(track, t)
        assert -5.0 <= c[1] <= 5.0 and 0.0 <= c[0] <= 5.0
        assert math.isclose(float(np.hypot(*d)), 1.0, abs_tol=1e-12)

    def test_nonincreasing_times_rejected(self):
        with pytest.raises(ConfigurationError):
            TargetTrack(waypoints=((0.0, 0, 0), (0.0, 1, 1)), bbox_size=(1, 1))

    def test_bad_signal_kind_rejected(self):
        with pytest.raises(ConfigurationError):
            TargetTrack(waypoints=((0.0, 0, 0),), bbox_size=(1, 1), signal_kind="radar")


class TestBboxCorners:
    def test_axis_aligned_when_moving_north(self):
        track = TargetTrack(waypoints=((0.0, 0.0, 0.0), (1.0, 0.0, 10.0)),
                            bbox_size=(2.0, 1.0))
        corners = target_bbox_corners(track, 0.5)
        xs = sorted(c[0] for c in corners)
        ys = sorted(c[1] for c in corners)
        assert np.allclose(xs, [-0.5, -0.5, 0.5, 0.5])
        assert np.allclose(ys, [4.0, 4.0, 6.0, 6.0])

    def test_center_is_corner_mean(self):
        track = TargetTrack(waypoints=((0.0, 0.0, 0.0), (1.0, 3.0, 4.0)),
                            bbox_size=(2.0, 1.0))
        corners = target_bbox_corners(track, 0.5)
        center, _ = target_state(track, 0.5)
        assert np.allclose(corners.mean(axis=0), center)

    def test_oriented_along_motion(self):
        track = TargetTrack(waypoints=((0.0, 0.0, 0.0), (1.0, 10.0, 0.0)),
                            bbox_size=(4.0, 2.0))  # moving east
        corners = target_bbox_corners(track, 0.0)
        xs = sorted(c[0] for c in corners)
        ys = sorted(c[1] for c in corners)
        assert np.allclose(xs, [-2.0, -2.0, 2.0, 2.0])  # long side east-west
        assert np.allclose(ys, [-1.0, -1.0, 1.0, 1.0])


class TestSerialization:
    def test_round_trip_equality(self):
        scen = make_scenario(seed=11)
        again = scenario_from_dict(scenario_to_dict(scen))
        assert again == scen
        assert again.occluders == scen.occluders

    def test_yaml_round_trip(self):
        scen = make_scenario(seed=4, signal_kind="color")
        text = save_scenario(scen)
        again = load_scenario(text)
        assert again == scen

    def test_unknown_key_named(self):
        doc = scenario_to_dict(make_scenario())
        doc["treeline"] = 3
        with pytest.raises(ConfigurationError, match="treeline"):
            scenario_from_dict(doc)

    def test_missing_key_named(self):
        doc = scenario_to_dict(make_scenario())
        del doc["canopy_height"]
        with pytest.raises(ConfigurationError, match="canopy_height"):
            scenario_from_dict(doc)

    def test_unknown_target_key_named(self):
        doc = scenario_to_dict(make_scenario())
        doc["target"]["speed"] = 1.0
        with pytest.raises(ConfigurationError, match="speed"):
            scenario_from_dict(doc)

    def test_channel_count_enforced(self):
        doc = scenario_to_dict(make_scenario(signal_kind="thermal"))
        doc["background_signal"] = [0.2, 0.3, 0.4]  # 3 channels vs thermal
        with pytest.raises(ConfigurationError, match="background_signal"):
            scenario_from_dict(doc)

    def test_intensity_range_enforced(self):
        doc = scenario_to_dict(make_scenario())
        doc["target_signal"] = [1.5]
        with pytest.raises(ConfigurationError, match="target_signal"):
            scenario_from_dict(doc)

    def test_parse_error_wrapped(self):
        with pytest.raises(ConfigurationError):
            load_scenario("bounds: [0, 0, 10, 10\n  :::")

    def test_forest_regenerated_from_seed(self):
        # occluders are derived, not serialized: same seed -> same forest
        scen = make_scenario(seed=21, density=80.0)
        text = yaml.safe_dump(scenario_to_dict(scen))
        again = load_scenario(text)
        assert again.occluders == scen.occluders
