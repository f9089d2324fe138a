"""Append-only export sessions for the ADT1 trajectory container.

A session is opened once per training run, fed one `record` call per
optimizer step (flattened weights, plus loss and flattened gradient when
those channels were declared), and closed to finalize the header with
the true frame count. The writer is stdlib-only so it can ride along in
any training environment; the analysis side lives in a separate package
that shares nothing with this one but the wire format:

    offset  size  field
    0       4     magic b"ADT1"
    4       4     version, u32, currently 1
    8       8     d, u64
    16      8     n_steps, u64
    24      1     dtype code (0 = float32, 1 = float64)
    25      1     channel bitmask (bit0 = loss, bit1 = gradient)
    26      14    reserved, zero

followed by frame-major payload in the declared dtype, little-endian:
per step, d weights, then the loss if declared, then d gradient
components if declared.

Callers flatten their parameters themselves; pass a description of that
flattening order (e.g. a list of "name: shape" strings) as
`parameter_order` and it is stored next to the output in a sidecar JSON,
so a trajectory can later be mapped back onto named tensors. Sessions
are single-writer: one open handle per path, no concurrent `record`.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

__all__ = [
    "ExportSession",
    "ExportSummary",
    "SessionClosedError",
    "open_session",
    "record",
    "close",
]

MAGIC = b"ADT1"
VERSION = 1
HEADER_SIZE = 40

_HEADER = struct.Struct("<4sIQQBB14s")
_LOSS_BIT = 0x01
_GRADIENT_BIT = 0x02
# dtype name -> (header code, struct format char, bytes per value)
_DTYPES = {
    "f32": (0, "f", 4),
    "float32": (0, "f", 4),
    "f64": (1, "d", 8),
    "float64": (1, "d", 8),
}
_CANONICAL = {0: "f32", 1: "f64"}


class SessionClosedError(RuntimeError):
    """Raised by record or close on a session that was already closed."""


@dataclass(frozen=True)
class ExportSummary:
    """What close() reports: the finalized file and its frame count."""

    path: str
    frames_written: int
    d: int
    dtype: str
    channels: tuple[str, ...]
    file_size: int


@dataclass
class ExportSession:
    """An open ADT1 writer; use open_session to construct one."""

    path: str
    d: int
    dtype: str
    channels: tuple[str, ...]
    frames_written: int = 0
    _fh: object = field(default=None, repr=False)
    _dtype_code: int = field(default=1, repr=False)
    _fmt: str = field(default="d", repr=False)
    _itemsize: int = field(default=8, repr=False)

    @property
    def closed(self) -> bool:
        return self._fh is None

    def record(self, weights, loss=None, gradient=None) -> None:
        """Append one frame in the declared dtype.

        weights (and gradient, when that channel was declared) must be
        flat sequences of exactly d values; loss must be a scalar when
        declared. Channels are all-or-nothing per session: supplying an
        undeclared one or omitting a declared one is an error.
        """
        if self._fh is None:
            raise SessionClosedError(f"{self.path}: record on a closed session")
        has_loss = "loss" in self.channels
        has_grad = "gradient" in self.channels
        if has_loss and loss is None:
            raise ValueError(f"{self.path}: session declares a loss channel, record got loss=None")
        if not has_loss and loss is not None:
            raise ValueError(f"{self.path}: session declares no loss channel, record got a loss")
        if has_grad and gradient is None:
            raise ValueError(
                f"{self.path}: session declares a gradient channel, record got gradient=None"
            )
        if not has_grad and gradient is not None:
            raise ValueError(
                f"{self.path}: session declares no gradient channel, record got a gradient"
            )

        parts = [self._pack_vector(weights, "weight")]
        if has_loss:
            try:
                parts.append(struct.pack(f"<{self._fmt}", loss))
            except (struct.error, TypeError) as exc:
                raise ValueError(f"{self.path}: loss is not a real scalar: {exc}") from None
        if has_grad:
            parts.append(self._pack_vector(gradient, "gradient"))

        self._fh.write(b"".join(parts))
        self.frames_written += 1

    def close(self) -> ExportSummary:
        """Patch the header with the true frame count and close the file."""
        if self._fh is None:
            raise SessionClosedError(f"{self.path}: session already closed")
        fh = self._fh
        self._fh = None
        try:
            fh.seek(0)
            fh.write(_pack_header(self.d, self.frames_written, self._dtype_code, self.channels))
        finally:
            fh.close()
        width = self.d + (1 if "loss" in self.channels else 0) + (
            self.d if "gradient" in self.channels else 0
        )
        return ExportSummary(
            path=self.path,
            frames_written=self.frames_written,
            d=self.d,
            dtype=self.dtype,
            channels=self.channels,
            file_size=HEADER_SIZE + self.frames_written * width * self._itemsize,
        )

    def __enter__(self) -> "ExportSession":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if self._fh is not None:
            self.close()

    def _pack_vector(self, values, label: str) -> bytes:
        values = list(values)
        if len(values) != self.d:
            raise ValueError(
                f"{self.path}: expected {self.d} {label} components, got {len(values)}"
            )
        try:
            return struct.pack(f"<{self.d}{self._fmt}", *values)
        except (struct.error, TypeError) as exc:
            raise ValueError(f"{self.path}: {label} contains a non-real value: {exc}") from None


def _pack_header(d: int, n_steps: int, dtype_code: int, channels: tuple[str, ...]) -> bytes:
    mask = (_LOSS_BIT if "loss" in channels else 0) | (
        _GRADIENT_BIT if "gradient" in channels else 0
    )
    return _HEADER.pack(MAGIC, VERSION, d, n_steps, dtype_code, mask, b"\x00" * 14)


def open_session(path, d: int, dtype: str = "f64", channels=(), parameter_order=None) -> ExportSession:
    """Start a new trajectory file and return the session to feed.

    path must not exist yet (sessions never clobber); d is the flattened
    parameter count; dtype is "f32" or "f64"; channels is any subset of
    ("loss", "gradient"). A provisional header with n_steps = 0 is
    written immediately, so a crashed run leaves a readable (if empty
    by-declaration) file; close() patches in the true count.

    parameter_order, when given, is any JSON-serializable description of
    how the caller flattens its parameters (typically a list of
    "name: shape" strings); it is written to `path + ".meta.json"`
    together with the session declaration.
    """
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"d must be a positive parameter count, got {d!r}")
    if str(dtype).lower() not in _DTYPES:
        raise ValueError(f"dtype must be f32 or f64, got {dtype!r}")
    code, fmt, itemsize = _DTYPES[str(dtype).lower()]
    channels = tuple(channels)
    for name in channels:
        if name not in ("loss", "gradient"):
            raise ValueError(f"unknown channel {name!r}, expected 'loss' or 'gradient'")

    path = str(path)
    fh = open(path, "xb")
    try:
        fh.write(_pack_header(d, 0, code, channels))
    except BaseException:
        fh.close()
        raise

    meta = {
        "format": "ADT1",
        "d": d,
        "dtype": _CANONICAL[code],
        "channels": list(channels),
        "parameter_order": parameter_order,
    }
    with open(path + ".meta.json", "w") as mh:
        json.dump(meta, mh, indent=2)
        mh.write("\n")

    return ExportSession(
        path=path,
        d=d,
        dtype=_CANONICAL[code],
        channels=channels,
        _fh=fh,
        _dtype_code=code,
        _fmt=fmt,
        _itemsize=itemsize,
    )


def record(session: ExportSession, weights, loss=None, gradient=None) -> None:
    """Append one frame to the session (method alias)."""
    session.record(weights, loss=loss, gradient=gradient)


def close(session: ExportSession) -> ExportSummary:
    """Finalize the session's header and return its summary (method alias)."""
    return session.close()
