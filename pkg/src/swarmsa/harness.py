"""Closed-loop experiment runner: per-iteration sense/detect/step loop, metric
definitions, deterministic replay, and artifact export."""

from __future__ import annotations

import json
import time as _time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .aperture import FocalPlane, IntegrationConfig, VirtualCamera, signal_integral
from .errors import ConfigurationError, RunAbortedError, SwarmsaError
from .objective import BlobConstraints, multi_reference_evaluate
from .rx import rx_scores, rx_stats, top_fraction_mask
from .scenario import (Scenario, scenario_from_dict, scenario_to_dict,
                       target_bbox_corners, target_state)
from .sensor import CameraModel, DriftState, Pose, advance_drift, render_frame, reported_pose
from .swarm import (Hyperparameters, Mode, SwarmState, guided_follow, initial_state,
                    min_pairwise_distance, pso_step)
from . import pnm

CORRECT = "correct"
WRONG = "wrong"
NONE = "no"

DEFAULT_D_MAX = 3.0  # m; derived from the gap between correct and wrong rows


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    hyper: Hyperparameters
    integration: IntegrationConfig
    camera: CameraModel
    rx_fraction: float = 0.9975
    constraints: BlobConstraints = field(default_factory=BlobConstraints)
    iterations: int = 50
    seed_world: int = 0
    seed_drift: int = 1
    seed_pso: int = 2
    d_max: float = DEFAULT_D_MAX
    noise_sigma: float = 0.01
    pos_sigma: float = 0.02
    drift_bound: float = 5.0
    drift_step_sigma: float = 0.5
    start_center: tuple[float, float] = (0.0, 0.0)
    base_altitude: float = 35.0
    dt: float = 1.0  # seconds of scenario time per PSO iteration
    move_epsilon: float = 0.1

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigurationError("iterations: must be at least 1")
        if self.d_max <= 0:
            raise ConfigurationError("d_max: must be positive")
        if not (0.0 < self.rx_fraction < 1.0):
            raise ConfigurationError("rx_fraction: must lie in (0, 1)")


@dataclass
class RunLog:
    header: dict
    records: list[dict] = field(default_factory=list)
    anomaly_images: list[np.ndarray] | None = None
    signal_images: list[np.ndarray] | None = None


def config_to_dict(cfg: RunConfig) -> dict:
    return {
        "scenario": scenario_to_dict(cfg.scenario),
        "hyperparameters": {
            "c1": cfg.hyper.c1, "c2": cfg.hyper.c2, "c3": cfg.hyper.c3,
            "c4": cfg.hyper.c4, "c5": cfg.hyper.c5, "s": cfg.hyper.s,
            "SD": cfg.hyper.sd, "T": cfg.hyper.t_conf, "N": cfg.hyper.n_drones,
            "fov": cfg.hyper.fov, "safety_margin": cfg.hyper.safety_margin,
        },
        "integration": {
            "n": cfg.integration.n,
            "heading_range": cfg.integration.heading_range,
            "delta_range": cfg.integration.delta_range,
            "theta_range": cfg.integration.theta_range,
            "phi_range": cfg.integration.phi_range,
        },
        "camera": {"fov": cfg.camera.fov, "resolution": list(cfg.camera.resolution)},
        "rx_fraction": cfg.rx_fraction,
        "blob_constraints": {
            "min_area": cfg.constraints.min_area,
            "max_area": (None if cfg.constraints.max_area == float("inf")
                         else cfg.constraints.max_area),
            "max_axis_ratio": (None if cfg.constraints.max_axis_ratio == float("inf")
                               else cfg.constraints.max_axis_ratio),
            "v_min": cfg.constraints.v_min,
        },
        "iterations": cfg.iterations,
        "seeds": {"world": cfg.seed_world, "drift": cfg.seed_drift, "pso": cfg.seed_pso},
        "d_max": cfg.d_max,
        "noise_sigma": cfg.noise_sigma,
        "pos_sigma": cfg.pos_sigma,
        "drift": {"bound": cfg.drift_bound, "step_sigma": cfg.drift_step_sigma},
        "start_center": list(cfg.start_center),
        "base_altitude": cfg.base_altitude,
        "dt": cfg.dt,
        "move_epsilon": cfg.move_epsilon,
    }


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigurationError("run config: expected a mapping")
    for key in ("scenario", "hyperparameters"):
        if key not in doc:
            raise ConfigurationError(f"run config: missing key {key}")
    scen = scenario_from_dict(doc["scenario"])
    hp = doc["hyperparameters"]
    try:
        hyper = Hyperparameters(
            c1=float(hp["c1"]), c2=float(hp["c2"]), c3=float(hp["c3"]),
            c4=float(hp["c4"]), c5=float(hp["c5"]),
            s=float(hp.get("s", hp["c4"])), sd=float(hp.get("SD", 0.0)),
            t_conf=float(hp.get("T", 2.0)), n_drones=int(hp["N"]),
            fov=float(hp["fov"]),
            safety_margin=float(hp.get("safety_margin", 0.2)),
        )
    except KeyError as e:
        raise ConfigurationError(f"hyperparameters: missing key {e.args[0]}")
    idoc = doc.get("integration", {})
    integration = IntegrationConfig(
        n=int(idoc.get("n", 10)),
        heading_range=float(idoc.get("heading_range", 5.0)),
        delta_range=float(idoc.get("delta_range", 0.0)),
        theta_range=float(idoc.get("theta_range", 0.0)),
        phi_range=float(idoc.get("phi_range", 0.0)),
    )
    cdoc = doc.get("camera", {})
    camera = CameraModel(fov=float(cdoc.get("fov", hyper.fov)),
                         resolution=tuple(cdoc.get("resolution", (128, 128))))
    bdoc = doc.get("blob_constraints", {})
    constraints = BlobConstraints(
        min_area=float(bdoc.get("min_area", 0.0)),
        max_area=float(bdoc["max_area"]) if bdoc.get("max_area") is not None else float("inf"),
        max_axis_ratio=(float(bdoc["max_axis_ratio"])
                        if bdoc.get("max_axis_ratio") is not None else float("inf")),
        v_min=float(bdoc.get("v_min", 0.125)),
    )
    seeds = doc.get("seeds", {})
    ddoc = doc.get("drift", {})
    return RunConfig(
        scenario=scen, hyper=hyper, integration=integration, camera=camera,
        rx_fraction=float(doc.get("rx_fraction", 0.9975)),
        constraints=constraints,
        iterations=int(doc.get("iterations", 50)),
        seed_world=int(seeds.get("world", 0)),
        seed_drift=int(seeds.get("drift", 1)),
        seed_pso=int(seeds.get("pso", 2)),
        d_max=float(doc.get("d_max", DEFAULT_D_MAX)),
        noise_sigma=float(doc.get("noise_sigma", 0.01)),
        pos_sigma=float(doc.get("pos_sigma", 0.02)),
        drift_bound=float(ddoc.get("bound", 5.0)),
        drift_step_sigma=float(ddoc.get("step_sigma", 0.5)),
        start_center=tuple(doc.get("start_center", (0.0, 0.0))),
        base_altitude=float(doc.get("base_altitude", 35.0)),
        dt=float(doc.get("dt", 1.0)),
        move_epsilon=float(doc.get("move_epsilon", 0.1)),
    )


def load_run_config(text: str) -> RunConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigurationError(f"run config: parse error: {e}")
    return config_from_dict(doc)


def distance_to_bbox(point, corners: np.ndarray) -> float:
    """Euclidean distance from a ground point to an oriented rectangle given by
    its 4 corners (0 inside)."""
    p = np.asarray(point, dtype=float)
    corners = np.asarray(corners, dtype=float)
    inside = True
    best = float("inf")
    n = len(corners)
    sign = 0.0
    for i in range(n):
        a = corners[i]
        b = corners[(i + 1) % n]
        edge = b - a
        rel = p - a
        cross = edge[0] * rel[1] - edge[1] * rel[0]
        if sign == 0.0 and abs(cross) > 1e-12:
            sign = np.sign(cross)
        elif cross * sign < -1e-12:
            inside = False
        # distance to segment
        L2 = float(edge @ edge)
        t = float(np.clip(rel @ edge / L2, 0.0, 1.0)) if L2 > 0 else 0.0
        closest = a + t * edge
        best = min(best, float(np.hypot(*(p - closest))))
    return 0.0 if inside else best


def classify_detection(estimate, bbox_corners, d_max: float) -> str:
    if estimate is None:
        return NONE
    return CORRECT if distance_to_bbox(estimate, bbox_corners) <= d_max else WRONG


class Runner:
    """Stateful iteration engine shared by `run` and the live bridge session."""

    def __init__(self, config: RunConfig, collect_images: bool = False):
        self.config = config
        self.collect_images = collect_images
        self.reset()

    def reset(self, seed: int | None = None):
        cfg = self.config
        if seed is not None:
            cfg = replace(cfg, seed_world=seed, seed_drift=seed + 1, seed_pso=seed + 2)
            self.config = cfg
        self.state = initial_state(cfg.hyper, cfg.start_center, cfg.base_altitude)
        self.drift_states = [DriftState(0.0, cfg.drift_bound, cfg.drift_step_sigma)
                             for _ in range(cfg.hyper.n_drones)]
        self.iteration = 0
        self.guide_xy = None
        self.log = RunLog(header=config_to_dict(cfg),
                          records=[],
                          anomaly_images=[] if self.collect_images else None,
                          signal_images=[] if self.collect_images else None)

    @property
    def finished(self) -> bool:
        return self.iteration >= self.config.iterations

    def set_guide(self, xy):
        self.guide_xy = (float(xy[0]), float(xy[1]))

    def release_guide(self):
        self.guide_xy = None
        self.state = replace(self.state, guide_xy=None, last_guide_xy=None)

    def step(self) -> dict:
        """Run one closed-loop iteration and append its record to the log."""
        cfg = self.config
        it = self.iteration
        try:
            return self._step_inner(cfg, it)
        except SwarmsaError:
            raise
        except Exception as e:  # attach the iteration index per the run contract
            raise RunAbortedError(it, e) from e

    def _step_inner(self, cfg: RunConfig, it: int) -> dict:
        t_wall = _time.perf_counter()
        sim_time = it * cfg.dt
        n = cfg.hyper.n_drones

        self.drift_states = [advance_drift(d, (cfg.seed_drift, i), it)
                             for i, d in enumerate(self.drift_states)]
        true_poses = [Pose(position=tuple(self.state.positions[i]), heading=0.0)
                      for i in range(n)]
        rep_poses = [reported_pose(true_poses[i], self.drift_states[i], cfg.pos_sigma,
                                   seed=(cfg.seed_world, 7, it, i))
                     for i in range(n)]
        frames = [render_frame(cfg.scenario, true_poses[i], cfg.camera, sim_time,
                               cfg.noise_sigma, seed=(cfg.seed_world, it, i))
                  for i in range(n)]
        masks = [top_fraction_mask(rx_scores(f, rx_stats(f)), cfg.rx_fraction)
                 for f in frames]
        obs = multi_reference_evaluate(masks, rep_poses, cfg.camera, None,
                                       cfg.integration, cfg.constraints)

        detected = obs.best_blob is not None and obs.confidence > cfg.hyper.t_conf
        estimate = obs.best_blob.centroid_ground if detected else None
        gt_center, _ = target_state(cfg.scenario.target, sim_time)
        gt_corners = target_bbox_corners(cfg.scenario.target, sim_time)
        verdict = classify_detection(estimate, gt_corners, cfg.d_max)
        dist = distance_to_bbox(estimate, gt_corners) if estimate is not None else None

        if self.collect_images:
            self.log.anomaly_images.append(obs.integral.values.copy())
            ref = rep_poses[obs.reference_index]
            vcam = VirtualCamera(position=ref.position, heading=ref.heading,
                                 fov=cfg.camera.fov, resolution=cfg.camera.resolution)
            sig = signal_integral(frames, rep_poses, cfg.camera,
                                  FocalPlane(delta=ref.position[2]), vcam)
            self.log.signal_images.append(sig.values.copy())

        # controller step: guided rigid follow preempts the PSO branches
        if self.guide_xy is not None:
            stepped, followed = guided_follow(self.state, self.guide_xy, cfg.move_epsilon)
            if followed:
                self.state = stepped
            else:
                self.state = pso_step(stepped, obs, cfg.hyper, cfg.seed_pso)
        else:
            self.state = pso_step(self.state, obs, cfg.hyper, cfg.seed_pso)
        assert min_pairwise_distance(self.state.positions) >= cfg.hyper.c4 - 1e-6

        record = {
            "iter": it,
            "time": sim_time,
            "drones": [
                {
                    "true": _pose_dict(true_poses[i]),
                    "reported": _pose_dict(rep_poses[i]),
                }
                for i in range(n)
            ],
            "mode": self.state.mode.value,
            "observation": {
                "confidence": obs.confidence,
                "confidences": list(obs.confidences),
                "reference": obs.reference_index,
                "blob": _blob_dict(obs.best_blob),
            },
            "verdict": verdict,
            "estimate": list(estimate) if estimate is not None else None,
            "gt_center": [float(gt_center[0]), float(gt_center[1])],
            "gt_bbox": [[float(x), float(y)] for x, y in gt_corners],
            "distance": dist,
            "timing_ms": (_time.perf_counter() - t_wall) * 1000.0,
        }
        self.log.records.append(record)
        self.iteration += 1
        return record


def _pose_dict(pose: Pose) -> dict:
    return {"x": pose.position[0], "y": pose.position[1], "z": pose.position[2],
            "heading": pose.heading}


def _blob_dict(blob) -> dict | None:
    if blob is None:
        return None
    return {
        "area_px": blob.area,
        "relevance": blob.relevance,
        "centroid_px": list(blob.centroid_px),
        "ground_xy": list(blob.centroid_ground),
        "bbox_px": list(blob.bbox_px),
        "axis_lengths": list(blob.axis_lengths),
    }


def run(config: RunConfig, collect_images: bool = False) -> RunLog:
    """Execute the full closed loop deterministically; see Runner for the
    per-iteration structure."""
    runner = Runner(config, collect_images=collect_images)
    while not runner.finished:
        runner.step()
    return runner.log


def metrics(log: RunLog) -> dict:
    """Precision/recall over detection verdicts, mean distance over correct
    rows, mean confidence over all rows. Undefined ratios stay None."""
    records = log.records
    n_correct = sum(1 for r in records if r["verdict"] == CORRECT)
    n_wrong = sum(1 for r in records if r["verdict"] == WRONG)
    n_none = sum(1 for r in records if r["verdict"] == NONE)
    precision = n_correct / (n_correct + n_wrong) if (n_correct + n_wrong) else None
    recall = n_correct / (n_correct + n_none) if (n_correct + n_none) else None
    dists = [r["distance"] for r in records if r["verdict"] == CORRECT]
    mean_distance = sum(dists) / len(dists) if dists else None
    confs = [r["observation"]["confidence"] for r in records]
    mean_confidence = sum(confs) / len(confs) if confs else None
    return {
        "correct": n_correct, "wrong": n_wrong, "none": n_none,
        "precision": precision, "recall": recall,
        "mean_distance": mean_distance, "mean_confidence": mean_confidence,
    }


def verdict_metrics(verdicts) -> dict:
    """Metric identities on a bare verdict multiset (no full log needed)."""
    fake = RunLog(header={}, records=[
        {"verdict": v, "distance": 0.0, "observation": {"confidence": 0.0}}
        for v in verdicts
    ])
    return metrics(fake)


def record_lines(log: RunLog, strip_timing: bool = False) -> list[str]:
    lines = []
    for rec in log.records:
        if strip_timing:
            rec = {k: v for k, v in rec.items() if k != "timing_ms"}
        lines.append(json.dumps(rec, sort_keys=True))
    return lines


def save_runlog(log: RunLog, path) -> None:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(json.dumps({"config": log.header}, sort_keys=True) + "\n")
        for line in record_lines(log):
            fh.write(line + "\n")


def load_runlog(path) -> RunLog:
    path = Path(path)
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ConfigurationError(f"{path}: empty run log")
    header = json.loads(lines[0])["config"]
    return RunLog(header=header, records=[json.loads(ln) for ln in lines[1:]])


def replay(log: RunLog) -> tuple[bool, dict]:
    """Re-run the log's config and verify bit-identical records (wall-clock
    excluded). Returns (match, metrics of the replayed run)."""
    config = config_from_dict(log.header)
    fresh = run(config)
    match = (record_lines(fresh, strip_timing=True)
             == record_lines(log, strip_timing=True))
    return match, metrics(fresh)


def export(log: RunLog, directory) -> list[Path]:
    """Write the replayable log, per-iteration integral images, the confidence
    series, and the metrics summary."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if log.anomaly_images is None:
        # images were not collected during the run; regenerate deterministically
        log = run(config_from_dict(log.header), collect_images=True)
    written = []

    path = directory / "runlog.jsonl"
    save_runlog(log, path)
    written.append(path)

    for i, (anom, sig) in enumerate(zip(log.anomaly_images, log.signal_images)):
        p = directory / f"anomaly_{i:04d}.pgm"
        pnm.write(p, anom)
        written.append(p)
        p = directory / (f"signal_{i:04d}.ppm" if sig.ndim == 3 and sig.shape[2] == 3
                         else f"signal_{i:04d}.pgm")
        pnm.write(p, sig)
        written.append(p)

    series = directory / "confidence_series.csv"
    with open(series, "w") as fh:
        fh.write("iteration,confidence,threshold,verdict\n")
        t_conf = log.header.get("hyperparameters", {}).get("T", "")
        for rec in log.records:
            fh.write(f"{rec['iter']},{rec['observation']['confidence']},"
                     f"{t_conf},{rec['verdict']}\n")
    written.append(series)

    summary = directory / "metrics.json"
    with open(summary, "w") as fh:
        json.dump(metrics(log), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(summary)
    return written
