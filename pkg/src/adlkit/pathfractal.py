"""Fractal diagnostics of walker paths and of the loss along them.

path_scaling relates end-to-end displacement to contour length over all
(anchor, span) pairs in a window; the pooled point cloud is averaged in
log-log space (a geometric moving average, which preserves exact power
laws) and fitted with one or two segments. msl measures the mean squared
loss difference between weight pairs at a given separation; its power-law
exponent is twice the roughness (Hurst) exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import ArgumentError, DataError, DomainError
from .msd import RMSE_THRESH, PowerLawFit, fit_power_law
from .trajectory import Series, Trajectory, Window

__all__ = [
    "PathFractalResult",
    "TransverseProfile",
    "MslCurve",
    "path_scaling",
    "transverse_profile",
    "transverse_distance",
    "msl",
]

_MAX_SPANS = 512
_MAX_ANCHORS = 2048
_TRANSVERSE_SPANS = 48
_TRANSVERSE_BUDGET = 200_000
_FIT_BINS_PER_DECADE = 24


@dataclass(frozen=True)
class PathFractalResult:
    """Two-segment scaling dr^2 ~ ds^lambda; the path dimension is
    D_f = 2 / lambda per segment. crossover_l is None when a single power
    law already fits the whole curve."""

    lambda_short: float
    lambda_long: float
    d_f_short: float
    d_f_long: float
    crossover_l: float | None
    ds_dr2: Series
    smoothing_window: int


@dataclass(frozen=True)
class TransverseProfile:
    """Maximum chord-perpendicular excursion vs end-to-end distance.

    self_similar is True when the binned relation admits a power law with
    log-RMSE below the shared 0.03 threshold; straight-line (zero
    excursion) inputs are flagged degenerate instead of fitted."""

    series: Series | None
    scaling_fit: PowerLawFit | None
    self_similar: bool
    skipped_pairs: int
    degenerate: bool


@dataclass(frozen=True)
class MslCurve:
    """Mean squared loss difference per log-spaced separation bin."""

    window: Window
    bin_centers: np.ndarray
    msl: np.ndarray
    pair_counts: np.ndarray
    hurst_fit: PowerLawFit | None

    def __post_init__(self):
        for name in ("bin_centers", "msl", "pair_counts"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def hurst(self) -> float | None:
        if self.hurst_fit is None:
            return None
        return self.hurst_fit.exponent / 2.0


def _window_frames(traj: Trajectory, window: Window) -> np.ndarray:
    window.check(traj)
    return traj.frames[window.t_w - 1 : window.t_w - 1 + window.T]


def _span_grid(t: int, n_max: int, k_min: int = 1) -> np.ndarray:
    ks = np.arange(k_min, t)
    if ks.size > n_max:
        ks = np.unique(np.round(np.geomspace(k_min, t - 1, n_max)).astype(np.int64))
    return ks


def _segment_fit(pref, i: int, j: int) -> tuple[float, float, float]:
    """Least-squares line over points [i, j) from prefix sums; returns
    (slope, intercept, residual sum of squares)."""
    sx, sy, sxx, sxy, syy = (p[j] - p[i] for p in pref)
    n = j - i
    den = n * sxx - sx * sx
    if den <= 0:
        return 0.0, float(sy / n), 0.0
    slope = (n * sxy - sx * sy) / den
    intercept = (sy - slope * sx) / n
    ss = max(syy - intercept * sy - slope * sxy, 0.0)
    return float(slope), float(intercept), float(ss)


def path_scaling(
    traj: Trajectory,
    window: Window,
    smoothing: int = 40,
    rmse_thresh: float = RMSE_THRESH,
) -> PathFractalResult:
    """Pooled (contour length, squared end-to-end distance) scaling over
    the window, with a one- or two-segment log-log fit."""
    if window.T < 100:
        raise ArgumentError(f"path scaling needs a window of >= 100 steps, got T={window.T}")
    if smoothing < 1:
        raise ArgumentError(f"smoothing must be >= 1, got {smoothing}")
    frames = _window_frames(traj, window)
    t = frames.shape[0]
    steps = np.linalg.norm(np.diff(frames, axis=0), axis=1)
    if not np.any(steps > 0):
        raise DomainError("degenerate path: all steps have zero length")
    cum = np.concatenate(([0.0], np.cumsum(steps)))

    ds_parts = []
    dr2_parts = []
    # spans comparable to the window give a single overlapping sample of
    # dr^2 whose scatter the fit would chase; keep >= 8 independent blocks
    k_max = max(2, t // 8)
    for k in _span_grid(k_max + 1, _MAX_SPANS).tolist():
        anchors = np.arange(0, t - k)
        if anchors.size > _MAX_ANCHORS:
            anchors = np.unique(np.linspace(0, t - k - 1, _MAX_ANCHORS).astype(np.int64))
        diff = frames[anchors + k] - frames[anchors]
        ds_parts.append(cum[anchors + k] - cum[anchors])
        dr2_parts.append(np.einsum("ij,ij->i", diff, diff))
    ds = np.concatenate(ds_parts)
    dr2 = np.concatenate(dr2_parts)

    ok = (ds > 0) & (dr2 > 0)
    ds = ds[ok]
    dr2 = dr2[ok]
    if ds.size < 10:
        raise DomainError("too few usable pairs with positive length and displacement")

    # collapse exact duplicate contour lengths, then smooth in log space
    uniq, inverse = np.unique(ds, return_inverse=True)
    counts = np.bincount(inverse)
    mean_dr2 = np.bincount(inverse, weights=dr2) / counts
    lx = np.log10(uniq)
    ly = np.log10(mean_dr2)

    # dedup already aggregates lattice-like paths down to few points; the
    # moving average is for the dense-scatter case and must not eat them
    m = min(smoothing, max(1, lx.size // 10))
    if m > 1:
        kernel = np.full(m, 1.0 / m)
        lx = np.convolve(lx, kernel, mode="valid")
        ly = np.convolve(ly, kernel, mode="valid")
    if lx.size < 10:
        raise DomainError(f"only {lx.size} smoothed points; nothing to fit")

    # resample onto a log-uniform grid before fitting: pair counts are wildly
    # unequal across scales (short spans contribute a sliver of the pool but
    # a share of the decades), so the segment fit must weight per log-ds bin,
    # not per pair; geometric bin means keep exact power laws exact
    span = lx[-1] - lx[0]
    n_bins = max(1, int(math.ceil(span * _FIT_BINS_PER_DECADE)))
    idx = np.clip(((lx - lx[0]) / max(span, 1e-300) * n_bins).astype(np.int64), 0, n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    filled = counts > 0
    lx = np.bincount(idx, weights=lx, minlength=n_bins)[filled] / counts[filled]
    ly = np.bincount(idx, weights=ly, minlength=n_bins)[filled] / counts[filled]
    npts = lx.size

    pref = tuple(
        np.concatenate(([0.0], np.cumsum(v)))
        for v in (lx, ly, lx * lx, lx * ly, ly * ly)
    )
    slope_all, _, ss_all = _segment_fit(pref, 0, npts)
    rmse_all = math.sqrt(ss_all / npts)

    if rmse_all < rmse_thresh or npts < 10:
        # one regime, or too narrow a scale range to resolve two
        lam_s = lam_l = slope_all
        crossover = None
    else:
        best = None
        for split in range(5, npts - 4):
            _, _, ss_l = _segment_fit(pref, 0, split)
            _, _, ss_r = _segment_fit(pref, split, npts)
            total = ss_l + ss_r
            if best is None or total < best[0]:
                best = (total, split)
        split = best[1]
        lam_s, _, _ = _segment_fit(pref, 0, split)
        lam_l, _, _ = _segment_fit(pref, split, npts)
        crossover = float(10 ** lx[split])

    def dim(lam: float) -> float:
        return math.inf if lam == 0 else 2.0 / lam

    return PathFractalResult(
        lambda_short=float(lam_s),
        lambda_long=float(lam_l),
        d_f_short=dim(lam_s),
        d_f_long=dim(lam_l),
        crossover_l=crossover,
        ds_dr2=Series(x=10**lx, y=10**ly),
        smoothing_window=smoothing,
    )


def _clamp_cancellation(perp2: np.ndarray, vv: np.ndarray) -> np.ndarray:
    """Zero squared excursions below the float64 cancellation noise of
    |v|^2 - proj^2, so points lying on the chord line register as 0."""
    perp2[perp2 < 64.0 * np.finfo(np.float64).eps * vv] = 0.0
    return perp2


def transverse_distance(traj: Trajectory, t: int, t2: int) -> float:
    """Maximum perpendicular distance of intermediate points from the
    infinite line through frames t and t2 (1-based, t2 >= t + 2)."""
    if t < 1 or t2 > traj.n_steps:
        raise ArgumentError(f"steps {t}, {t2} outside 1..{traj.n_steps}")
    if t2 < t + 2:
        raise ArgumentError("chord needs at least one intermediate point")
    a = traj.frames[t - 1]
    b = traj.frames[t2 - 1]
    chord = b - a
    norm = np.linalg.norm(chord)
    if norm == 0:
        raise DomainError("chord endpoints coincide")
    mids = traj.frames[t : t2 - 1] - a
    proj = mids @ (chord / norm)
    vv = np.einsum("ij,ij->i", mids, mids)
    perp2 = _clamp_cancellation(vv - proj**2, vv)
    return float(math.sqrt(max(float(perp2.max()), 0.0)))


def transverse_profile(
    traj: Trajectory,
    window: Window,
    n_bins: int = 32,
    rmse_thresh: float = RMSE_THRESH,
) -> TransverseProfile:
    """Binned transverse excursion vs end-to-end distance over sampled
    (anchor, span) pairs in the window."""
    frames = _window_frames(traj, window)
    t = frames.shape[0]
    if t < 3:
        raise ArgumentError("window too short for any chord")

    dr_parts = []
    tr_parts = []
    skipped = 0
    for k in _span_grid(t, _TRANSVERSE_SPANS, k_min=2).tolist():
        anchors = np.arange(0, t - k)
        cap = max(16, _TRANSVERSE_BUDGET // k)
        if anchors.size > cap:
            anchors = np.unique(np.linspace(0, t - k - 1, cap).astype(np.int64))
        chord = frames[anchors + k] - frames[anchors]
        norm = np.linalg.norm(chord, axis=1)
        ok = norm > 0
        skipped += int((~ok).sum())
        if not ok.any():
            continue
        anchors = anchors[ok]
        chord = chord[ok]
        norm = norm[ok]
        unit = chord / norm[:, None]
        max_perp2 = np.zeros(anchors.size)
        for j in range(1, k):
            v = frames[anchors + j] - frames[anchors]
            proj = np.einsum("ij,ij->i", v, unit)
            vv = np.einsum("ij,ij->i", v, v)
            perp2 = _clamp_cancellation(vv - proj**2, vv)
            np.maximum(max_perp2, perp2, out=max_perp2)
        dr_parts.append(norm)
        tr_parts.append(np.sqrt(np.maximum(max_perp2, 0.0)))

    if not dr_parts:
        return TransverseProfile(
            series=None, scaling_fit=None, self_similar=False,
            skipped_pairs=skipped, degenerate=True,
        )
    dr = np.concatenate(dr_parts)
    tr = np.concatenate(tr_parts)

    edges = np.geomspace(dr.min(), dr.max() * (1 + 1e-12), n_bins + 1)
    idx = np.clip(np.searchsorted(edges, dr, side="right") - 1, 0, n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    sums = np.bincount(idx, weights=tr, minlength=n_bins)
    keep = counts > 0
    centers = np.sqrt(edges[:-1] * edges[1:])[keep]
    means = sums[keep] / counts[keep]

    series = Series(x=centers, y=means)
    positive = means > 0
    fit = None
    if int(positive.sum()) >= 5:
        sub = Series(x=centers[positive], y=means[positive])
        fit = fit_power_law(sub, (float(sub.x[0]), float(sub.x[-1])))
    degenerate = not positive.any()
    return TransverseProfile(
        series=series,
        scaling_fit=fit,
        self_similar=fit is not None and fit.rmse < rmse_thresh,
        skipped_pairs=skipped,
        degenerate=degenerate,
    )


def msl(
    traj: Trajectory,
    window: Window,
    bins: int | np.ndarray = 32,
    min_pairs: int = 50,
    max_pairs: int = 2_000_000,
    seed: int = 0,
) -> MslCurve:
    """Mean squared loss difference over weight-space separation bins.

    bins is either a count of log-spaced bins spanning the observed
    positive separations, or an explicit increasing array of bin edges.
    All unordered pairs in the window are used when T <= 2000; larger
    windows draw a seeded uniform subsample of max_pairs pairs.
    """
    if traj.losses is None:
        raise DataError("msl requires a loss channel")
    frames = _window_frames(traj, window)
    losses = traj.losses[window.t_w - 1 : window.t_w - 1 + window.T]
    t = frames.shape[0]

    if t <= 2000:
        dr = pdist(frames)
        dl2 = pdist(losses[:, None]) ** 2
    else:
        rng = np.random.default_rng(seed)
        i = rng.integers(0, t, max_pairs)
        j = rng.integers(0, t, max_pairs)
        mask = i != j
        i, j = i[mask], j[mask]
        diff = frames[i] - frames[j]
        dr = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        dl2 = (losses[i] - losses[j]) ** 2

    pos = dr > 0
    if not pos.any():
        raise DataError("all pairs have zero separation; msl undefined")
    dr = dr[pos]
    dl2 = dl2[pos]

    if np.ndim(bins) == 0:
        n_bins = int(bins)
        if n_bins < 1:
            raise ArgumentError(f"bin count must be >= 1, got {n_bins}")
        edges = np.geomspace(dr.min(), dr.max() * (1 + 1e-12), n_bins + 1)
    else:
        edges = np.asarray(bins, dtype=np.float64)
        if edges.size < 2 or np.any(np.diff(edges) <= 0) or edges[0] <= 0:
            raise ArgumentError("bin edges must be >= 2 increasing positive values")
        n_bins = edges.size - 1
    idx = np.clip(np.searchsorted(edges, dr, side="right") - 1, 0, n_bins - 1)
    inside = (dr >= edges[0]) & (dr < edges[-1])
    idx = idx[inside]
    dl2_in = dl2[inside]
    counts = np.bincount(idx, minlength=n_bins)
    sums = np.bincount(idx, weights=dl2_in, minlength=n_bins)

    keep = counts >= min_pairs
    if not keep.any():
        raise DataError(
            f"no separation bin reaches min_pairs={min_pairs}; "
            "window too short or separations too spread"
        )
    centers = np.sqrt(edges[:-1] * edges[1:])[keep]
    values = sums[keep] / counts[keep]
    kept_counts = counts[keep]

    fit = None
    positive = values > 0
    if int(positive.sum()) >= 5:
        sub = Series(x=centers[positive], y=values[positive])
        fit = fit_power_law(sub, (float(sub.x[0]), float(sub.x[-1])))
    return MslCurve(
        window=window,
        bin_centers=centers,
        msl=values,
        pair_counts=kept_counts,
        hurst_fit=fit,
    )
