"""Training-loop export hook: snapshot per-step weights (plus optional
loss and gradient) into the ADT1 trajectory container for offline
diffusion analysis."""

__version__ = "0.1.0"

from .session import (
    HEADER_SIZE,
    MAGIC,
    VERSION,
    ExportSession,
    ExportSummary,
    SessionClosedError,
    close,
    open_session,
    record,
)

__all__ = [
    "__version__",
    "MAGIC",
    "VERSION",
    "HEADER_SIZE",
    "ExportSession",
    "ExportSummary",
    "SessionClosedError",
    "open_session",
    "record",
    "close",
]
