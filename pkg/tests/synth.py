"""Synthetic trajectories, curves, and rasters used as test oracles."""

from __future__ import annotations

import numpy as np

from adlkit import MsdCurve, Trajectory, Window


def ballistic_traj(n: int, velocity) -> Trajectory:
    """w(t) = t * v, exact MSD |v|^2 tau^2."""
    v = np.asarray(velocity, dtype=np.float64)
    t = np.arange(1, n + 1, dtype=np.float64)
    return Trajectory(frames=t[:, None] * v[None, :])


def gaussian_walk(n: int, d: int, step_std: float, seed: int) -> Trajectory:
    rng = np.random.default_rng(seed)
    steps = rng.normal(0.0, step_std, size=(n - 1, d))
    frames = np.vstack([np.zeros((1, d)), np.cumsum(steps, axis=0)])
    return Trajectory(frames=frames)


def power_law_curve(lags, exponent: float, prefactor: float = 1.0,
                    t_w: int = 1, T: int = 2) -> MsdCurve:
    lags = np.asarray(lags, dtype=np.int64)
    return MsdCurve(
        window=Window(t_w=t_w, T=T),
        lags=lags,
        values=prefactor * lags.astype(np.float64) ** exponent,
    )


def piecewise_curve(lags, exp_lo: float, exp_hi: float, knee: float) -> MsdCurve:
    """Continuous two-regime power law: exp_lo below the knee, exp_hi above."""
    lags = np.asarray(lags, dtype=np.int64)
    x = lags.astype(np.float64)
    lo = x**exp_lo
    hi = knee ** (exp_lo - exp_hi) * x**exp_hi
    return MsdCurve(window=Window(t_w=1, T=2), lags=lags,
                    values=np.where(x < knee, lo, hi))


def midpoint_profile_1d(n_levels: int, hurst: float, seed: int) -> np.ndarray:
    """1D midpoint-displacement profile with 2^n_levels + 1 points: Gaussian
    midpoint offsets with std 2^(-hurst * level) * sqrt(1 - 2^(2 hurst - 2)),
    the classic recursion whose increments scale as separation^hurst."""
    rng = np.random.default_rng(seed)
    n = 2**n_levels + 1
    prof = np.zeros(n)
    prof[-1] = rng.standard_normal()
    reduction = np.sqrt(1.0 - 2.0 ** (2 * hurst - 2))
    span = n - 1
    level = 0
    while span > 1:
        level += 1
        half = span // 2
        sigma = 2.0 ** (-hurst * level) * reduction
        mids = np.arange(half, n - 1, span)
        prof[mids] = 0.5 * (prof[mids - half] + prof[mids + half]) \
            + sigma * rng.standard_normal(mids.size)
        span = half
    return prof


def profile_trajectory(profile: np.ndarray, spacing: float = 1.0) -> Trajectory:
    """1D trajectory walking the profile left to right with the profile
    values as the loss channel."""
    x = np.arange(profile.size, dtype=np.float64) * spacing
    return Trajectory(frames=x[:, None], losses=profile)


def sierpinski_mask(depth: int) -> np.ndarray:
    """Sierpinski carpet raster of side 3^depth."""
    mask = np.ones((1, 1), dtype=bool)
    for _ in range(depth):
        n = mask.shape[0]
        nxt = np.zeros((3 * n, 3 * n), dtype=bool)
        for bi in range(3):
            for bj in range(3):
                if bi == 1 and bj == 1:
                    continue
                nxt[bi * n : (bi + 1) * n, bj * n : (bj + 1) * n] = mask
        mask = nxt
    return mask


def semicircle_traj(radius: float, n: int = 51) -> Trajectory:
    theta = np.linspace(0.0, np.pi, n)
    frames = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    return Trajectory(frames=frames)
