"""Exception taxonomy shared across the toolkit.

Everything derives from ToolkitError so callers can catch the whole family;
the concrete classes also subclass the matching builtin where one exists.
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class ArgumentError(ToolkitError, ValueError):
    """A caller-supplied argument violates a precondition."""


class DomainError(ToolkitError, ValueError):
    """Input is structurally fine but mathematically unusable (e.g. log of a
    non-positive value)."""


class DataError(ToolkitError, ValueError):
    """Input data is missing a required channel or is degenerate."""


class ValidationError(DataError):
    """A trajectory failed invariant validation on ingestion."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class FitError(ToolkitError, RuntimeError):
    """An estimator failed to converge; message carries diagnostics."""


class OutOfBoundsError(ToolkitError, ValueError):
    """A position lies outside the field extent."""


class BoundaryError(OutOfBoundsError):
    """A position is too close to the field boundary for the requested
    stencil."""


class FormatError(ToolkitError, ValueError):
    """A binary container has a bad magic, version, or layout byte."""


class TruncationError(FormatError):
    """A binary container's payload size disagrees with its header."""
