"""FastAPI wrapper around a live Session: WebSocket state stream + command
intake, plus small REST endpoints for thin clients."""

from __future__ import annotations

import asyncio
import contextlib
import json
import logging

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from pydantic import ValidationError

from ..harness import RunConfig, metrics
from . import schemas
from .session import Session

log = logging.getLogger(__name__)


def create_app(config: RunConfig, include_ground_truth: bool = False,
               iteration_period: float = 0.0) -> FastAPI:
    session = Session(config, include_ground_truth=include_ground_truth,
                      iteration_period=iteration_period)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        session.start()
        yield
        session.stop()

    app = FastAPI(title="swarmsa bridge", lifespan=lifespan)
    app.state.session = session

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "iteration": session.runner.iteration,
                "finished": session.runner.finished}

    @app.get("/state", response_model=schemas.StateUpdate | None)
    def state():
        return session.latest_update

    @app.get("/metrics")
    def run_metrics() -> dict:
        return metrics(session.runner.log)

    @app.post("/command", response_model=schemas.CommandAck | schemas.CommandRejection)
    def command(envelope: schemas.CommandEnvelope):
        return session.submit(envelope.command)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        loop = asyncio.get_running_loop()
        queue: asyncio.Queue = asyncio.Queue()

        def on_update(update):
            loop.call_soon_threadsafe(queue.put_nowait, update)

        session.add_listener(on_update)
        if session.latest_update is not None:
            await ws.send_text(session.latest_update.model_dump_json())

        async def pump():
            while True:
                update = await queue.get()
                await ws.send_text(update.model_dump_json())

        sender = asyncio.create_task(pump())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    envelope = schemas.CommandEnvelope(command=json.loads(raw))
                except (json.JSONDecodeError, ValidationError) as e:
                    await ws.send_text(
                        schemas.CommandRejection(reason=f"malformed command: {e}")
                        .model_dump_json())
                    continue
                reply = session.submit(envelope.command)
                await ws.send_text(reply.model_dump_json())
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            session.remove_listener(on_update)

    return app
