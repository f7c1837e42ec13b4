"""Minimal binary portable-pixmap I/O (P5 graymap, P6 pixmap), 8-bit row-major."""

from __future__ import annotations

import base64

import numpy as np


def to_bytes(values: np.ndarray, normalize: bool = False) -> bytes:
    """Encode an array as P5 (2-D or single-channel) or P6 (3-channel) bytes.

    Values are expected in [0, 1] and scaled by 255; `normalize` min-max
    rescales first (display of unbounded score maps).
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[..., 0]
    if normalize:
        lo, hi = arr.min(), arr.max()
        arr = (arr - lo) / (hi - lo) if hi > lo else np.zeros_like(arr)
    data = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    if data.ndim == 2:
        header = f"P5\n{data.shape[1]} {data.shape[0]}\n255\n"
    elif data.ndim == 3 and data.shape[2] == 3:
        header = f"P6\n{data.shape[1]} {data.shape[0]}\n255\n"
    else:
        raise ValueError(f"cannot encode array of shape {arr.shape} as PNM")
    return header.encode("ascii") + data.tobytes()


def write(path, values: np.ndarray, normalize: bool = False) -> None:
    with open(path, "wb") as fh:
        fh.write(to_bytes(values, normalize=normalize))


def read(path) -> np.ndarray:
    """Read a binary P5/P6 file back into a float array in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    return from_bytes(data)


def from_bytes(data: bytes) -> np.ndarray:
    magic, rest = data.split(b"\n", 1)
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"unsupported PNM magic {magic!r}")
    fields = []
    while len(fields) < 3:
        line, rest = rest.split(b"\n", 1)
        line = line.split(b"#")[0]
        fields.extend(line.split())
    width, height, maxval = (int(v) for v in fields[:3])
    channels = 1 if magic == b"P5" else 3
    pixels = np.frombuffer(rest[: width * height * channels], dtype=np.uint8)
    pixels = pixels.reshape((height, width) if channels == 1 else (height, width, 3))
    return pixels.astype(float) / maxval


def to_base64(values: np.ndarray, max_side: int | None = None,
              normalize: bool = False) -> tuple[str, int, int]:
    """PGM-encode (optionally downscaled by striding) and base64 for transport."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[..., 0]
    if max_side is not None:
        stride = max(1, int(np.ceil(max(arr.shape[:2]) / max_side)))
        arr = arr[::stride, ::stride]
    raw = to_bytes(arr, normalize=normalize)
    return base64.b64encode(raw).decode("ascii"), arr.shape[1], arr.shape[0]
