"""Wire schemas for the operator console. Field names are normative."""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field


class DroneState(BaseModel):
    id: int
    x: float
    y: float
    z: float
    heading: float


class BlobSummary(BaseModel):
    x: float
    y: float
    relevance: float
    bbox_px: Optional[list[int]] = None


class Thumbnail(BaseModel):
    w: int
    h: int
    encoding: Literal["pgm-base64"] = "pgm-base64"
    data: str


class StateUpdate(BaseModel):
    type: Literal["state"] = "state"
    iter: int
    drones: list[DroneState]
    mode: str
    confidence: float
    T: float
    verdict: str
    blob: Optional[BlobSummary] = None
    image: Optional[Thumbnail] = None
    gt: Optional[list[float]] = None  # debug sessions only
    timing_ms: float = 0.0


class GuideCommand(BaseModel):
    type: Literal["guide"]
    x: float
    y: float


class ReleaseCommand(BaseModel):
    type: Literal["release"]


class PauseCommand(BaseModel):
    type: Literal["pause"]


class ResumeCommand(BaseModel):
    type: Literal["resume"]


class SetParamsCommand(BaseModel):
    type: Literal["set_params"]
    c1: Optional[float] = None
    c2: Optional[float] = None
    c3: Optional[float] = None
    c4: Optional[float] = None
    c5: Optional[float] = None
    s: Optional[float] = None
    T: Optional[float] = None

    def partial(self) -> dict:
        out = {}
        for name in ("c1", "c2", "c3", "c4", "c5", "s"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        if self.T is not None:
            out["t_conf"] = self.T
        return out


class ResetCommand(BaseModel):
    type: Literal["reset"]
    seed: int


Command = Union[GuideCommand, ReleaseCommand, PauseCommand, ResumeCommand,
                SetParamsCommand, ResetCommand]


class CommandEnvelope(BaseModel):
    command: Command = Field(discriminator="type")


class CommandRejection(BaseModel):
    type: Literal["error"] = "error"
    reason: str


class CommandAck(BaseModel):
    type: Literal["ack"] = "ack"
    command: str
