"""Shared fixtures: small deterministic scenarios and run configurations that
keep the module tests fast."""

from __future__ import annotations

import pytest

from swarmsa.aperture import IntegrationConfig
from swarmsa.harness import RunConfig
from swarmsa.objective import BlobConstraints
from swarmsa.scenario import Rect, Scenario, TargetTrack, generate_forest
from swarmsa.sensor import CameraModel
from swarmsa.swarm import Hyperparameters


def make_scenario(seed: int = 7, density: float = 50.0, signal_kind: str = "thermal",
                  moving: bool = True) -> Scenario:
    bounds = Rect(-30.0, -30.0, 30.0, 30.0)
    channels = 1 if signal_kind == "thermal" else 3
    if moving:
        waypoints = ((0.0, 0.0, -5.0), (10.0, 0.0, 5.0), (20.0, 5.0, 5.0))
    else:
        waypoints = ((0.0, 0.0, 0.0),)
    scen = Scenario(
        bounds=bounds,
        forest_density=density,
        canopy_height=18.0,
        crown_radius_range=(1.0, 2.0),
        target=TargetTrack(waypoints=waypoints, bbox_size=(1.6, 1.2),
                           signal_kind=signal_kind),
        background_signal=(0.3,) * channels,
        occluder_signal=(0.38,) * channels,
        target_signal=(0.9,) * channels,
        seed=seed,
    )
    occluders = generate_forest(density, bounds, (1.0, 2.0), 18.0, seed)
    object.__setattr__(scen, "occluders", occluders)
    return scen


def make_run_config(seed: int = 3, iterations: int = 4, density: float = 40.0,
                    resolution: int = 48) -> RunConfig:
    hyper = Hyperparameters(c1=1.0, c2=2.0, c3=1.0, c4=4.0, c5=0.3, s=4.5,
                            sd=0.0, t_conf=2.0, n_drones=3, fov=40.0)
    return RunConfig(
        scenario=make_scenario(seed=seed, density=density),
        hyper=hyper,
        integration=IntegrationConfig(n=3, heading_range=2.0),
        camera=CameraModel(fov=40.0, resolution=(resolution, resolution)),
        constraints=BlobConstraints(min_area=0.3, max_area=30.0, v_min=0.125),
        iterations=iterations,
        seed_world=seed * 100,
        seed_drift=seed * 100 + 1,
        seed_pso=seed * 100 + 2,
        start_center=(0.0, -5.0),
        base_altitude=30.0,
    )


@pytest.fixture
def tiny_config() -> RunConfig:
    return make_run_config()


@pytest.fixture
def criterion_line(request):
    """Emit a line straight to the terminal, bypassing output capture."""
    def emit(text: str) -> None:
        reporter = request.config.pluginmanager.get_plugin("terminalreporter")
        if reporter is not None:
            reporter.write_line(text)
        else:  # fallback when running without the terminal plugin
            print(text)
    return emit
