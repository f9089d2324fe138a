"""Binary trajectory container (magic "ADT1").

Layout, all integers little-endian:

    offset  size  field
    0       4     magic b"ADT1"
    4       4     version, u32, currently 1
    8       8     d, u64
    16      8     n_steps, u64
    24      1     dtype code (0 = float32, 1 = float64)
    25      1     channel bitmask (bit0 = loss, bit1 = gradient)
    26      14    reserved, must be zero

The payload is frame-major: for each step, d weights, then the loss value
if bit0 is set, then d gradient components if bit1 is set, all in the
declared dtype. Total file size is therefore
40 + n_steps * (d + bit0 + bit1 * d) * dtype_size bytes.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .errors import ArgumentError, FormatError, TruncationError, ValidationError
from .trajectory import Trajectory, validate

__all__ = ["MAGIC", "VERSION", "HEADER_SIZE", "write_trajectory", "read_trajectory"]

MAGIC = b"ADT1"
VERSION = 1
HEADER_SIZE = 40

_HEADER = struct.Struct("<4sIQQBB14s")
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_CODES = {"f32": 0, "float32": 0, "f64": 1, "float64": 1}

LOSS_BIT = 0x01
GRADIENT_BIT = 0x02


def frame_width(d: int, channels: int) -> int:
    """Values per frame for a given dimension and channel bitmask."""
    return d + (1 if channels & LOSS_BIT else 0) + (d if channels & GRADIENT_BIT else 0)


def pack_header(d: int, n_steps: int, dtype_code: int, channels: int) -> bytes:
    return _HEADER.pack(MAGIC, VERSION, d, n_steps, dtype_code, channels, b"\x00" * 14)


def write_trajectory(traj: Trajectory, path, dtype: str = "f64") -> None:
    """Write the trajectory to path in the ADT1 container, atomically."""
    code = _CODES.get(str(dtype).lower())
    if code is None:
        raise ArgumentError(f"dtype must be f32 or f64, got {dtype!r}")
    channels = 0
    if traj.has_losses:
        channels |= LOSS_BIT
    if traj.has_gradients:
        channels |= GRADIENT_BIT

    n, d = traj.n_steps, traj.d
    payload = np.empty((n, frame_width(d, channels)), dtype=_DTYPES[code])
    payload[:, :d] = traj.frames
    col = d
    if channels & LOSS_BIT:
        payload[:, col] = traj.losses
        col += 1
    if channels & GRADIENT_BIT:
        payload[:, col : col + d] = traj.gradients

    path = os.fspath(path)
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "wb") as fh:
            fh.write(pack_header(d, n, code, channels))
            fh.write(payload.tobytes())
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _parse_header(raw: bytes, path: str) -> tuple[int, int, int, int]:
    if len(raw) < HEADER_SIZE:
        raise TruncationError(
            f"{path}: expected at least {HEADER_SIZE} header bytes, found {len(raw)}"
        )
    magic, version, d, n_steps, code, channels, reserved = _HEADER.unpack(raw[:HEADER_SIZE])
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}, expected {VERSION}")
    if code not in _DTYPES:
        raise FormatError(f"{path}: unknown dtype code {code}")
    if channels & ~(LOSS_BIT | GRADIENT_BIT):
        raise FormatError(f"{path}: unknown channel bits in mask 0x{channels:02x}")
    if reserved != b"\x00" * 14:
        raise FormatError(f"{path}: reserved header bytes are not zero")
    if d < 1:
        raise FormatError(f"{path}: header declares d={d}")
    return d, n_steps, code, channels


def read_trajectory(path) -> Trajectory:
    """Read an ADT1 file into a validated Trajectory (float32 upcast)."""
    path = os.fspath(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    d, n_steps, code, channels = _parse_header(raw, path)

    dtype = _DTYPES[code]
    width = frame_width(d, channels)
    expected = HEADER_SIZE + n_steps * width * dtype.itemsize
    if len(raw) != expected:
        raise TruncationError(
            f"{path}: expected {expected} bytes for {n_steps} frames, found {len(raw)}"
        )

    payload = np.frombuffer(raw, dtype=dtype, offset=HEADER_SIZE).reshape(n_steps, width)
    frames = payload[:, :d]
    col = d
    losses = None
    gradients = None
    if channels & LOSS_BIT:
        losses = payload[:, col]
        col += 1
    if channels & GRADIENT_BIT:
        gradients = payload[:, col : col + d]

    traj = Trajectory(frames=frames, losses=losses, gradients=gradients)
    violations = validate(traj)
    if violations:
        raise ValidationError(violations)
    return traj
