"""Stochastic gradient walker on a HeightField.

Update rule: w_{t+1} = w_t - eta * grad(w_t) + eta * sigma * Z_t with Z_t
i.i.d. standard 2-D Gaussian, the gradient taken by central differences on
the bilinear interpolant. The walk is confined to the region at least one
cell from the field boundary (the gradient stencil needs that margin); the
boundary policy decides what happens when an update leaves it.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .landscape import HeightField, Minimum, eval_loss, numerical_gradient
from .trajectory import Trajectory

__all__ = [
    "SimConfig",
    "SimResult",
    "run_sgd",
    "detect_entry_time",
    "sweep",
    "RANDOM_HIGH_START",
]

RANDOM_HIGH_START = "random-high-altitude"
_BOUNDARIES = ("clamp", "reflect", "abort")


@dataclass(frozen=True)
class SimConfig:
    """Walker parameters. start is either an explicit (x, y) or the
    "random-high-altitude" policy: a uniform choice among interior cells
    whose value lies in the field's top decile."""

    eta: float
    sigma: float
    n_steps: int = 1000
    seed: int = 0
    start: tuple[float, float] | str = RANDOM_HIGH_START
    boundary: str = "reflect"

    def __post_init__(self):
        if not (self.eta > 0):
            raise ArgumentError(f"eta must be positive, got {self.eta}")
        if not (self.sigma >= 0):
            raise ArgumentError(f"sigma must be >= 0, got {self.sigma}")
        if self.n_steps < 1:
            raise ArgumentError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.boundary not in _BOUNDARIES:
            raise ArgumentError(
                f"boundary must be one of {_BOUNDARIES}, got {self.boundary!r}"
            )
        if isinstance(self.start, str):
            canon = self.start.replace(" ", "-").replace("_", "-")
            if canon != RANDOM_HIGH_START:
                raise ArgumentError(f"unknown start policy {self.start!r}")
            object.__setattr__(self, "start", RANDOM_HIGH_START)
        else:
            start = tuple(float(c) for c in self.start)
            if len(start) != 2:
                raise ArgumentError(f"start must be a 2-vector, got {self.start!r}")
            object.__setattr__(self, "start", start)

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "sigma": self.sigma,
            "n_steps": self.n_steps,
            "seed": self.seed,
            "start": list(self.start) if isinstance(self.start, tuple) else self.start,
            "boundary": self.boundary,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        start = d.get("start", RANDOM_HIGH_START)
        if isinstance(start, (list, tuple)):
            start = tuple(start)
        return cls(
            eta=d["eta"],
            sigma=d["sigma"],
            n_steps=d.get("n_steps", 1000),
            seed=d.get("seed", 0),
            start=start,
            boundary=d.get("boundary", "reflect"),
        )


@dataclass(frozen=True)
class SimResult:
    trajectory: Trajectory
    entry_step: int | None
    escaped: bool
    config: SimConfig


def _reflect(value: float, lo: float, hi: float) -> float:
    span = hi - lo
    v = (value - lo) % (2 * span)
    if v > span:
        v = 2 * span - v
    return lo + v


def _pick_high_start(field: HeightField, rng: np.random.Generator) -> tuple[float, float]:
    v = field.values
    n = field.n
    interior = v[1:-1, 1:-1]
    thresh = np.quantile(v, 0.9)
    cells = np.argwhere(interior >= thresh)
    if cells.size == 0:
        # top decile entirely on the border; fall back to the highest interior cell
        cells = np.argwhere(interior == interior.max())
    i, j = cells[rng.integers(len(cells))]
    h = field.spacing
    return float((i + 1) * h), float((j + 1) * h)


def run_sgd(field: HeightField, config: SimConfig) -> SimResult:
    """Run the walker; returns a d=2 trajectory with loss and gradient
    channels covering every recorded position."""
    h = field.spacing
    lo, hi = h, field.extent - h
    rng = np.random.default_rng(config.seed)

    if config.start == RANDOM_HIGH_START:
        pos = np.array(_pick_high_start(field, rng))
    else:
        pos = np.array(config.start, dtype=np.float64)
        if not (lo <= pos[0] <= hi and lo <= pos[1] <= hi):
            raise ArgumentError(
                f"start {tuple(pos)} must lie at least one cell ({h}) inside the "
                f"[0, {field.extent}]^2 boundary"
            )

    positions = [pos.copy()]
    losses = [eval_loss(field, pos)]
    grads = [numerical_gradient(field, pos)]
    escaped = False

    for _ in range(config.n_steps):
        z = rng.standard_normal(2)
        nxt = positions[-1] - config.eta * grads[-1] + config.eta * config.sigma * z
        out = not (lo <= nxt[0] <= hi and lo <= nxt[1] <= hi)
        if out:
            if config.boundary == "abort":
                escaped = True
                break
            if config.boundary == "clamp":
                nxt = np.clip(nxt, lo, hi)
            else:
                nxt = np.array([_reflect(nxt[0], lo, hi), _reflect(nxt[1], lo, hi)])
        positions.append(nxt)
        losses.append(eval_loss(field, nxt))
        grads.append(numerical_gradient(field, nxt))

    traj = Trajectory(
        frames=np.asarray(positions),
        losses=np.asarray(losses),
        gradients=np.asarray(grads),
    )
    return SimResult(trajectory=traj, entry_step=None, escaped=escaped, config=config)


def detect_entry_time(result: SimResult, minimum: Minimum, dwell: int = 50) -> int | None:
    """First step t from which the walker stays within the minimum's
    width_estimate for every step in [t, t + dwell]; None if never."""
    traj = result.trajectory
    if dwell < 1:
        raise ArgumentError(f"dwell must be >= 1, got {dwell}")
    if dwell >= traj.n_steps:
        raise ArgumentError(
            f"dwell {dwell} does not fit a {traj.n_steps}-step trajectory"
        )
    center = np.asarray(minimum.position)
    within = np.linalg.norm(traj.frames - center, axis=1) <= minimum.width_estimate
    # t qualifies when within[t-1 : t-1+dwell+1] is all true
    run = np.convolve(within.astype(np.int64), np.ones(dwell + 1, dtype=np.int64), "valid")
    hits = np.nonzero(run == dwell + 1)[0]
    return int(hits[0]) + 1 if hits.size else None


def sweep(field: HeightField, configs) -> list[SimResult]:
    """Run independent configs; results keep input order. Worker count is
    capped by the ADL_THREADS environment variable (default 1)."""
    configs = list(configs)
    threads = max(1, int(os.environ.get("ADL_THREADS", "1")))

    def run_one(item):
        idx, cfg = item
        try:
            return run_sgd(field, cfg)
        except Exception as exc:
            raise type(exc)(f"config[{idx}]: {exc}") from exc

    if threads == 1 or len(configs) <= 1:
        return [run_one(item) for item in enumerate(configs)]
    with ThreadPoolExecutor(max_workers=min(threads, len(configs))) as pool:
        return list(pool.map(run_one, enumerate(configs)))
