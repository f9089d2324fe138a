"""Trajectory data model and elementary displacement computations.

A trajectory is a time-ordered sequence of d-dimensional weight frames with
optional per-step loss and gradient channels. Steps are 1-based: frame t is
``frames[t - 1]``. All arrays are 64-bit floats and frozen after
construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DataError

__all__ = [
    "Trajectory",
    "Window",
    "Series",
    "displacement_sq",
    "validate",
    "loss_series",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Trajectory:
    """Weight frames (n_steps x d) plus optional loss/gradient channels.

    Channels are all-or-nothing: either a channel covers every step or it is
    absent. Structural problems raise ArgumentError at construction; value
    problems (non-finite entries) are reported by :func:`validate`.
    """

    frames: np.ndarray
    losses: np.ndarray | None = None
    gradients: np.ndarray | None = None
    time_unit: str = "iterations"

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 2:
            raise ArgumentError(f"frames must be 2-D (n_steps, d), got ndim={frames.ndim}")
        if frames.shape[1] < 1:
            raise ArgumentError("frames must have d >= 1 components")
        object.__setattr__(self, "frames", _freeze(frames))
        if self.losses is not None:
            losses = np.asarray(self.losses, dtype=np.float64)
            if losses.shape != (frames.shape[0],):
                raise ArgumentError(
                    f"losses shape {losses.shape} does not cover {frames.shape[0]} steps"
                )
            object.__setattr__(self, "losses", _freeze(losses))
        if self.gradients is not None:
            gradients = np.asarray(self.gradients, dtype=np.float64)
            if gradients.shape != frames.shape:
                raise ArgumentError(
                    f"gradients shape {gradients.shape} does not match frames {frames.shape}"
                )
            object.__setattr__(self, "gradients", _freeze(gradients))

    @property
    def n_steps(self) -> int:
        return self.frames.shape[0]

    @property
    def d(self) -> int:
        return self.frames.shape[1]

    @property
    def has_losses(self) -> bool:
        return self.losses is not None

    @property
    def has_gradients(self) -> bool:
        return self.gradients is not None


@dataclass(frozen=True)
class Window:
    """Observation window: start step t_w (1-based) and length T in steps.

    The window's anchor steps are t_w .. t_w + T - 1; frame t_w + T must
    exist, so a window is valid for a trajectory when t_w + T <= n_steps.
    """

    t_w: int
    T: int

    def __post_init__(self):
        if int(self.t_w) != self.t_w or int(self.T) != self.T:
            raise ArgumentError("window fields must be integers")
        object.__setattr__(self, "t_w", int(self.t_w))
        object.__setattr__(self, "T", int(self.T))
        if self.t_w < 1:
            raise ArgumentError(f"t_w must be >= 1, got {self.t_w}")
        if self.T < 2:
            raise ArgumentError(f"T must be >= 2, got {self.T}")

    def check(self, traj: Trajectory) -> None:
        if self.t_w + self.T > traj.n_steps:
            raise ArgumentError(
                f"window (t_w={self.t_w}, T={self.T}) exceeds trajectory of "
                f"{traj.n_steps} steps"
            )


@dataclass(frozen=True)
class Series:
    """A sampled curve y(x) with strictly increasing x."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
            raise ArgumentError("series x and y must be 1-D and equally long")
        if x.size >= 2 and not np.all(np.diff(x) > 0):
            raise ArgumentError("series x must be strictly increasing")
        object.__setattr__(self, "x", _freeze(x))
        object.__setattr__(self, "y", _freeze(y))

    def __len__(self) -> int:
        return int(self.x.size)


def displacement_sq(traj: Trajectory, t: int, tau: int) -> float:
    """Squared displacement between frames t and t + tau.

    sum_i (w_i(t + tau) - w_i(t))^2 with 1-based t. Raises IndexError when
    either frame does not exist.
    """
    if tau < 0:
        raise IndexError(f"lag must be non-negative, got {tau}")
    if t < 1 or t + tau > traj.n_steps:
        raise IndexError(
            f"frames {t} and {t + tau} requested from a {traj.n_steps}-step trajectory"
        )
    diff = traj.frames[t + tau - 1] - traj.frames[t - 1]
    return float(diff @ diff)


def loss_series(traj: Trajectory) -> Series:
    """Loss channel as a Series over 1-based step indices."""
    if traj.losses is None:
        raise DataError("trajectory has no loss channel")
    return Series(x=np.arange(1, traj.n_steps + 1, dtype=np.float64), y=traj.losses)


def validate(traj: Trajectory) -> list[str]:
    """Check value-level invariants; returns a list of violation messages.

    Each message names the 1-based frame index and the offending field. An
    empty list means the trajectory is clean.
    """
    violations: list[str] = []
    bad = ~np.isfinite(traj.frames).all(axis=1)
    for idx in np.nonzero(bad)[0]:
        violations.append(f"frame {idx + 1}: non-finite value in frames")
    if traj.losses is not None:
        bad = ~np.isfinite(traj.losses)
        for idx in np.nonzero(bad)[0]:
            violations.append(f"frame {idx + 1}: non-finite value in losses")
    if traj.gradients is not None:
        bad = ~np.isfinite(traj.gradients).all(axis=1)
        for idx in np.nonzero(bad)[0]:
            violations.append(f"frame {idx + 1}: non-finite value in gradients")
    return violations
