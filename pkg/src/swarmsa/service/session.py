"""Live run session: drives the harness loop, buffers operator commands, and
applies them only at iteration boundaries. Transport-agnostic; the FastAPI
layer wraps this with WebSocket plumbing."""

from __future__ import annotations

import threading
from dataclasses import replace

from ..errors import ConfigurationError
from ..harness import RunConfig, Runner
from .. import pnm
from . import schemas

THUMBNAIL_MAX_SIDE = 256


class Session:
    def __init__(self, config: RunConfig, include_ground_truth: bool = False,
                 iteration_period: float = 0.0):
        self.runner = Runner(config, collect_images=True)
        self.include_ground_truth = include_ground_truth
        self.iteration_period = iteration_period
        self._commands: list[dict] = []
        self._lock = threading.Lock()
        self._paused = threading.Event()
        self._stop = threading.Event()
        self._done = threading.Event()
        self._listeners: list = []
        self.latest_update: schemas.StateUpdate | None = None
        self._thread: threading.Thread | None = None

    # -- command intake (any thread) --

    def submit(self, command) -> schemas.CommandAck | schemas.CommandRejection:
        """Validate and buffer a command; applied at the next boundary."""
        reason = self._validate(command)
        if reason is not None:
            return schemas.CommandRejection(reason=reason)
        with self._lock:
            self._commands.append(command)
        return schemas.CommandAck(command=command.type)

    def _validate(self, command) -> str | None:
        if isinstance(command, schemas.SetParamsCommand):
            try:
                self._merged_hyper(command)
            except ConfigurationError as e:
                return str(e)
        return None

    def _merged_hyper(self, command: schemas.SetParamsCommand):
        return replace(self.runner.config.hyper, **command.partial())

    # -- listeners --

    def add_listener(self, callback) -> None:
        with self._lock:
            self._listeners.append(callback)

    def remove_listener(self, callback) -> None:
        with self._lock:
            if callback in self._listeners:
                self._listeners.remove(callback)

    # -- loop --

    def start(self) -> None:
        self._thread = threading.Thread(target=self.loop, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        self._paused.clear()
        self._done.set()

    def wait(self, timeout: float | None = None) -> bool:
        return self._done.wait(timeout)

    def loop(self) -> None:
        try:
            while not self.runner.finished and not self._stop.is_set():
                self._apply_pending()
                if self._paused.is_set():
                    if self._stop.wait(0.02):
                        break
                    continue
                record = self.runner.step()
                update = self._to_update(record)
                self.latest_update = update
                for cb in list(self._listeners):
                    cb(update)
                if self.iteration_period > 0:
                    if self._stop.wait(self.iteration_period):
                        break
        finally:
            self._done.set()

    def _apply_pending(self) -> None:
        with self._lock:
            pending, self._commands = self._commands, []
        for cmd in pending:
            self._apply(cmd)

    def _apply(self, cmd) -> None:
        runner = self.runner
        if isinstance(cmd, schemas.GuideCommand):
            runner.set_guide((cmd.x, cmd.y))
        elif isinstance(cmd, schemas.ReleaseCommand):
            runner.release_guide()
        elif isinstance(cmd, schemas.PauseCommand):
            self._paused.set()
        elif isinstance(cmd, schemas.ResumeCommand):
            self._paused.clear()
        elif isinstance(cmd, schemas.SetParamsCommand):
            try:
                hyper = self._merged_hyper(cmd)
            except ConfigurationError:
                return  # re-validation failed against the current state; drop whole
            runner.config = replace(runner.config, hyper=hyper)
        elif isinstance(cmd, schemas.ResetCommand):
            runner.reset(seed=cmd.seed)

    def _to_update(self, record: dict) -> schemas.StateUpdate:
        blob = record["observation"]["blob"]
        image = None
        if self.runner.log.anomaly_images:
            data, w, h = pnm.to_base64(self.runner.log.anomaly_images[-1],
                                       max_side=THUMBNAIL_MAX_SIDE)
            image = schemas.Thumbnail(w=w, h=h, data=data)
        return schemas.StateUpdate(
            iter=record["iter"],
            drones=[
                schemas.DroneState(id=i, x=d["reported"]["x"], y=d["reported"]["y"],
                                   z=d["reported"]["z"], heading=d["reported"]["heading"])
                for i, d in enumerate(record["drones"])
            ],
            mode=record["mode"],
            confidence=record["observation"]["confidence"],
            T=self.runner.config.hyper.t_conf,
            verdict=record["verdict"],
            blob=(schemas.BlobSummary(x=blob["ground_xy"][0], y=blob["ground_xy"][1],
                                      relevance=blob["relevance"],
                                      bbox_px=blob["bbox_px"])
                  if blob else None),
            image=image,
            gt=record["gt_center"] if self.include_ground_truth else None,
            timing_ms=record["timing_ms"],
        )
