"""Modified particle swarm controller: divergence to a moving line scan when no
confident target exists, exploration/exploitation/track-bias convergence when
one does, repulsion-based minimum spacing, aperture geometry, altitude
stacking, and guided-follow mode."""

from __future__ import annotations

import enum
import itertools
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConfigurationError, ConstraintError, PackingTableError

log = logging.getLogger(__name__)

# Enclosing-to-unit radius ratios for N congruent circles packed in a circle
# (Graham et al. 1998; Fodor 2003 for N=13).
PACKING_RATIO = {
    2: 2.0,
    3: 1.0 + 2.0 / math.sqrt(3.0),
    4: 1.0 + math.sqrt(2.0),
    5: 1.0 + math.sqrt(2.0 * (1.0 + 1.0 / math.sqrt(5.0))),
    6: 3.0,
    7: 3.0,
    8: 1.0 + 1.0 / math.sin(math.pi / 7.0),
    9: 1.0 + math.sqrt(2.0 * (2.0 + math.sqrt(2.0))),
    10: 3.813,
    11: 1.0 + 1.0 / math.sin(math.pi / 9.0),
    12: 4.029,
    13: 2.0 + math.sqrt(5.0),
}

DEFAULT_SAFETY_MARGIN = 0.2  # m, downwash margin


class Mode(str, enum.Enum):
    SCANNING = "SCANNING"
    TRACKING = "TRACKING"
    GUIDED = "GUIDED"


def _unit_from_heading(deg: float) -> np.ndarray:
    psi = math.radians(deg)
    return np.array([math.sin(psi), math.cos(psi)])


@dataclass(frozen=True)
class Hyperparameters:
    c1: float  # m, exploration
    c2: float  # m, exploitation
    c3: float  # m/iteration, target/scan speed
    c4: float  # m, minimum horizontal distance
    c5: float  # divergence smoothness in [0, 1]
    s: float  # m, line-formation spacing
    sd: float  # initial scanning direction, degrees clockwise from north
    t_conf: float  # confidence threshold T
    n_drones: int
    fov: float  # degrees
    safety_margin: float = DEFAULT_SAFETY_MARGIN

    def __post_init__(self):
        if self.c1 > self.c2:
            raise ConfigurationError("hyperparameters: require c1 <= c2")
        if self.c1 + self.c2 > self.c4 + 1e-12:
            raise ConfigurationError("hyperparameters: require c1 + c2 <= c4")
        if not (0.0 <= self.c5 <= 1.0):
            raise ConfigurationError("hyperparameters: c5 must lie in [0, 1]")
        if self.t_conf <= 1.0:
            raise ConfigurationError("hyperparameters: confidence threshold T must exceed 1")
        if self.n_drones < 1:
            raise ConfigurationError("hyperparameters: N must be at least 1")

    @property
    def sd_vector(self) -> np.ndarray:
        return _unit_from_heading(self.sd)


@dataclass(frozen=True)
class SwarmState:
    positions: np.ndarray  # (N, 3)
    velocities: np.ndarray  # (N, 2)
    altitude_offsets: np.ndarray  # (N,), fixed for the whole run
    mode: Mode
    sd: np.ndarray  # unit ground vector
    track_history: tuple[tuple[int, tuple[float, float]], ...]
    c3_current: float
    iteration: int = 0
    ever_detected: bool = False
    guide_xy: tuple[float, float] | None = None
    last_guide_xy: tuple[float, float] | None = None

    @property
    def centroid(self) -> np.ndarray:
        return self.positions[:, :2].mean(axis=0)


def sa_diameter(c4: float, n: int) -> float:
    """Synthetic-aperture diameter a = c4 * r_N from the circle-packing table."""
    if n not in PACKING_RATIO:
        raise PackingTableError(f"no packing ratio tabulated for N={n} (supported: 2..13)")
    return c4 * PACKING_RATIO[n]


def altitude_gap(c4: float, n: int, fov: float,
                 safety_margin: float = DEFAULT_SAFETY_MARGIN) -> float:
    """Vertical gap keeping drones out of each other's frustum, plus margin."""
    if n < 2:
        raise ConfigurationError("altitude stacking needs at least 2 drones")
    return c4 / (n - 1) / math.tan(math.radians(fov) / 2.0) + safety_margin


def altitude_offsets(n: int, c4: float, fov: float,
                     safety_margin: float = DEFAULT_SAFETY_MARGIN) -> np.ndarray:
    """Per-drone z offsets i * dh; total stack height is (N-1) * dh."""
    dh = altitude_gap(c4, n, fov, safety_margin)
    return dh * np.arange(n)


def stack_height(n: int, dh: float) -> float:
    return (n - 1) * dh


def rutherford_scatter(positions: np.ndarray, c4: float, seed: int = 0,
                       max_sweeps: int = 100) -> np.ndarray:
    """Enforce the minimum horizontal distance by symmetric pairwise repulsion.

    Each violating pair is pushed apart along its connecting line by
    (c4 - d) / 2 + 1e-6 per endpoint; coincident pairs separate along a
    deterministic seed-derived direction. Sweeps repeat until all pairs are
    spaced or the sweep budget runs out (logged, best effort kept).
    """
    pts = np.asarray(positions, dtype=float).copy()
    n = len(pts)
    if n < 2:
        return pts
    rng = np.random.default_rng(seed)
    fallback_angles = rng.uniform(0.0, 2.0 * math.pi, n * n)
    for _ in range(max_sweeps):
        moved = False
        for i in range(n):
            for j in range(i + 1, n):
                delta = pts[j, :2] - pts[i, :2]
                d = float(np.hypot(delta[0], delta[1]))
                if d >= c4:
                    continue
                moved = True
                if d < 1e-12:
                    ang = fallback_angles[i * n + j]
                    direction = np.array([math.cos(ang), math.sin(ang)])
                    push = c4 / 2.0
                else:
                    direction = delta / d
                    push = (c4 - d) / 2.0 + 1e-6
                pts[i, :2] -= push * direction
                pts[j, :2] += push * direction
        if not moved:
            return pts
    log.warning("rutherford_scatter: spacing not fully converged after %d sweeps",
                max_sweeps)
    return pts


def min_pairwise_distance(positions: np.ndarray) -> float:
    n = len(positions)
    if n < 2:
        return math.inf
    best = math.inf
    for i in range(n):
        for j in range(i + 1, n):
            best = min(best, float(np.hypot(*(positions[j, :2] - positions[i, :2]))))
    return best


def _random_unit_vectors(seed, iteration: int, n: int) -> np.ndarray:
    vecs = np.empty((n, 2))
    for i in range(n):
        rng = np.random.default_rng((seed, iteration, i))
        ang = rng.uniform(0.0, 2.0 * math.pi)
        vecs[i] = (math.cos(ang), math.sin(ang))
    return vecs


def converge_step(state: SwarmState, p_best: np.ndarray, hyper: Hyperparameters,
                  seed) -> SwarmState:
    """Tracking motion: exploration + exploitation towards the reference drone
    + bias along the target's last observed direction."""
    n = len(state.positions)
    rand = _random_unit_vectors(seed, state.iteration, n)
    vel = np.empty((n, 2))
    for i in range(n):
        to_best = p_best[:2] - state.positions[i, :2]
        dist = float(np.hypot(to_best[0], to_best[1]))
        exploit = (to_best / dist) if dist > 1e-12 else np.zeros(2)
        vel[i] = hyper.c1 * rand[i] + hyper.c2 * exploit + state.c3_current * state.sd
    new_pos = state.positions.copy()
    new_pos[:, :2] += vel
    new_pos = rutherford_scatter(new_pos, hyper.c4, seed=_scatter_seed(seed, state.iteration))
    return replace(state, positions=new_pos, velocities=vel)


def line_slots(center: np.ndarray, sd: np.ndarray, spacing: float, n: int) -> np.ndarray:
    """N slots spaced `spacing` apart on a line orthogonal to the scan direction."""
    perp = np.array([-sd[1], sd[0]])
    offsets = (np.arange(n) - (n - 1) / 2.0) * spacing
    return center[None, :] + offsets[:, None] * perp[None, :]


def assign_slots(positions_xy: np.ndarray, slots: np.ndarray) -> np.ndarray:
    """Drone-to-slot assignment minimizing total travel distance (Hungarian)."""
    cost = np.linalg.norm(positions_xy[:, None, :] - slots[None, :, :], axis=2)
    rows, cols = linear_sum_assignment(cost)
    order = np.empty(len(slots), dtype=int)
    order[rows] = cols
    return order


def diverge_step(state: SwarmState, hyper: Hyperparameters, seed=0) -> SwarmState:
    """Scanning motion: interpolate towards a line formation that advances
    along the scan direction."""
    n = len(state.positions)
    center = state.centroid + state.c3_current * state.sd
    slots = line_slots(center, state.sd, hyper.s, n)
    assignment = assign_slots(state.positions[:, :2], slots)
    vel = np.empty((n, 2))
    new_pos = state.positions.copy()
    for i in range(n):
        vel[i] = hyper.c5 * (slots[assignment[i]] - state.positions[i, :2])
        new_pos[i, :2] += vel[i]
    new_pos = rutherford_scatter(new_pos, hyper.c4, seed=_scatter_seed(seed, state.iteration))
    return replace(state, positions=new_pos, velocities=vel)


def _scatter_seed(seed, iteration: int) -> int:
    if isinstance(seed, int):
        return (seed * 1_000_003 + iteration) % (2 ** 63)
    return iteration


def pso_step(state: SwarmState, observation, hyper: Hyperparameters, seed) -> SwarmState:
    """One controller iteration: convergence branch when the observation is
    confident, divergence branch otherwise."""
    confident = (observation is not None and observation.best_blob is not None
                 and observation.confidence > hyper.t_conf)
    if confident:
        blob_xy = observation.best_blob.centroid_ground
        history = state.track_history + ((state.iteration, blob_xy),)
        sd = state.sd
        c3 = state.c3_current
        if len(history) >= 2:
            (it0, p0), (it1, p1) = history[-2], history[-1]
            disp = np.array(p1) - np.array(p0)
            steps = max(it1 - it0, 1)
            dist = float(np.hypot(disp[0], disp[1]))
            c3 = dist / steps
            if dist > 1e-9:
                sd = disp / dist
        working = replace(state, mode=Mode.TRACKING, track_history=history,
                          sd=sd, c3_current=c3, ever_detected=True)
        p_best = state.positions[observation.reference_index]
        stepped = converge_step(working, p_best, hyper, seed)
    else:
        sd = state.sd
        if state.ever_detected and state.track_history:
            last = np.array(state.track_history[-1][1])
            vec = last - state.centroid
            norm = float(np.hypot(vec[0], vec[1]))
            if norm > 1e-9:
                sd = vec / norm
        working = replace(state, mode=Mode.SCANNING, sd=sd)
        stepped = diverge_step(working, hyper, seed)
    return replace(stepped, iteration=state.iteration + 1)


def guided_follow(state: SwarmState, guide_xy, move_epsilon: float = 0.1
                  ) -> tuple[SwarmState, bool]:
    """Rigidly translate the swarm so its centroid tracks the guide point.

    Returns (state, followed). `followed` is False when the guide has moved
    less than move_epsilon since the previous iteration, in which case the
    caller should hand control to pso_step for autonomous exploration.
    """
    guide = np.asarray(guide_xy, dtype=float)
    last = state.last_guide_xy
    moved = last is None or float(np.hypot(guide[0] - last[0], guide[1] - last[1])) > move_epsilon
    tracked = replace(state, guide_xy=(float(guide[0]), float(guide[1])),
                      last_guide_xy=(float(guide[0]), float(guide[1])))
    if not moved:
        return tracked, False
    shift = guide - state.centroid
    new_pos = state.positions.copy()
    new_pos[:, :2] += shift
    out = replace(tracked, positions=new_pos, mode=Mode.GUIDED,
                  iteration=state.iteration + 1)
    return out, True


def initial_state(hyper: Hyperparameters, start_center, base_altitude: float,
                  camera_fov: float | None = None) -> SwarmState:
    """Line formation centered at start_center, stacked altitudes."""
    n = hyper.n_drones
    sd = hyper.sd_vector
    slots = line_slots(np.asarray(start_center, dtype=float), sd, hyper.s, n)
    offsets = (altitude_offsets(n, hyper.c4, hyper.fov, hyper.safety_margin)
               if n >= 2 else np.zeros(1))
    positions = np.column_stack([slots, base_altitude + offsets])
    return SwarmState(positions=positions, velocities=np.zeros((n, 2)),
                      altitude_offsets=offsets, mode=Mode.SCANNING, sd=sd,
                      track_history=(), c3_current=hyper.c3)
