"""Mean-squared-displacement estimators and diffusion-regime detection.

The time-averaged MSD at lag tau is the mean of squared displacements over
the window's anchor steps t in [t_w, t_w + T - 1]; displaced frames t + tau
beyond the window are consumed when the trajectory has them, and anchors
whose displaced frame does not exist drop out of the average (the divisor
shrinks accordingly). A requested lag with no valid anchor at all is an
argument error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DomainError
from .trajectory import Series, Trajectory, Window

__all__ = [
    "MsdCurve",
    "PowerLawFit",
    "BetaSeries",
    "CrossoverResult",
    "RegimeReport",
    "RegimeChangeResult",
    "time_averaged_msd",
    "no_averaged_msd",
    "log_derivative_beta",
    "fit_power_law",
    "detect_crossover_tau0",
    "detect_regime_change_t0",
    "default_lags",
]

RMSE_THRESH = 0.03  # log10 units; shared default for single-power-law tests


@dataclass(frozen=True)
class MsdCurve:
    """Time-averaged MSD values over integer lags for one window."""

    window: Window
    lags: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if lags.ndim != 1 or lags.shape != values.shape:
            raise ArgumentError("lags and values must be 1-D and equally long")
        if lags.size >= 2 and not np.all(np.diff(lags) > 0):
            raise ArgumentError("lags must be strictly increasing")
        lags.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", values)

    def as_series(self) -> Series:
        return Series(x=self.lags.astype(np.float64), y=self.values)


@dataclass(frozen=True)
class PowerLawFit:
    """y = 10^log_prefactor * x^exponent fitted by least squares in log10;
    rmse is the residual RMS in log10 units."""

    exponent: float
    log_prefactor: float
    fit_range: tuple[float, float]
    rmse: float


@dataclass(frozen=True)
class BetaSeries:
    """Discrete log-derivative of an MSD curve at offset delta_tau."""

    lags: np.ndarray
    values: np.ndarray
    delta_tau: int = 20

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        lags.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class CrossoverResult:
    """Smallest lag from which the curve tail is a single power law.

    found is False when no candidate start qualifies; tau0 then reports the
    largest lag scanned and tail_fit is None.
    """

    tau0: int
    tail_fit: PowerLawFit | None
    found: bool


@dataclass(frozen=True)
class RegimeReport:
    tau0: int | None
    t0: int | None
    alpha1: float | None
    alpha2: float | None
    alpha3: float | None
    classification: str


@dataclass(frozen=True)
class RegimeChangeResult:
    t0: int | None
    report: RegimeReport


def default_lags(traj: Trajectory, window: Window) -> np.ndarray:
    """All integer lags 1 .. min(T, n_steps - t_w - T): every anchor in the
    window has its displaced frame, so no truncation occurs."""
    hi = min(window.T, traj.n_steps - window.t_w - window.T)
    if hi < 1:
        raise ArgumentError(
            f"window (t_w={window.t_w}, T={window.T}) leaves no untruncated lag "
            f"in a {traj.n_steps}-step trajectory"
        )
    return np.arange(1, hi + 1, dtype=np.int64)


def log_spaced_lags(traj: Trajectory, window: Window, per_decade: int = 64) -> np.ndarray:
    """Log-spaced subsample of the default grid, about per_decade lags per
    decade."""
    full = default_lags(traj, window)
    hi = int(full[-1])
    n_pts = max(2, int(per_decade * math.log10(hi)) + 1) if hi > 1 else 1
    grid = np.unique(np.round(np.geomspace(1, hi, n_pts)).astype(np.int64))
    return grid


def _msd_values(traj: Trajectory, window: Window, lags: np.ndarray) -> np.ndarray:
    frames = traj.frames
    n = traj.n_steps
    a0 = window.t_w - 1  # 0-based first anchor
    a1 = a0 + window.T  # one past last anchor
    out = np.empty(lags.size, dtype=np.float64)
    for k, tau in enumerate(lags.tolist()):
        # anchors whose displaced frame falls off the end drop out and the
        # divisor shrinks to the surviving count
        hi = min(a1, n - tau)
        if hi <= a0:
            raise ArgumentError(
                f"lag {tau} exceeds available frames for window starting at {window.t_w}"
            )
        diff = frames[a0 + tau : hi + tau] - frames[a0:hi]
        out[k] = np.mean(np.einsum("ij,ij->i", diff, diff))
    return out


def time_averaged_msd(traj: Trajectory, window: Window, lags=None) -> MsdCurve:
    """Time-averaged MSD over the window's anchors for each requested lag.

    lags=None uses the untruncated default grid 1..min(T, n - t_w - T).
    Larger explicit lags average over the anchors that still have a
    displaced frame; a lag with no valid anchor at all is an error.
    """
    window.check(traj)
    if lags is None:
        lag_arr = default_lags(traj, window)
    else:
        lag_arr = np.asarray(lags, dtype=np.int64)
        if lag_arr.ndim != 1 or lag_arr.size == 0:
            raise ArgumentError("lags must be a non-empty 1-D sequence")
        if np.any(lag_arr < 1):
            raise ArgumentError("lags must be >= 1")
        if lag_arr.size >= 2 and not np.all(np.diff(lag_arr) > 0):
            raise ArgumentError("lags must be strictly increasing")
    values = _msd_values(traj, window, lag_arr)
    return MsdCurve(window=window, lags=lag_arr, values=values)


def no_averaged_msd(traj: Trajectory, t_w: int, lags) -> Series:
    """Per-component squared displacement from the single anchor t_w:
    displacement_sq(t_w, tau) / d for each lag."""
    lag_arr = np.asarray(lags, dtype=np.int64)
    if lag_arr.ndim != 1 or lag_arr.size == 0:
        raise ArgumentError("lags must be a non-empty 1-D sequence")
    if np.any(lag_arr < 1):
        raise ArgumentError("lags must be >= 1")
    if t_w < 1 or t_w + int(lag_arr.max()) > traj.n_steps:
        raise ArgumentError(
            f"anchor {t_w} with max lag {int(lag_arr.max())} exceeds "
            f"{traj.n_steps} steps"
        )
    base = traj.frames[t_w - 1]
    diff = traj.frames[t_w - 1 + lag_arr] - base
    vals = np.einsum("ij,ij->i", diff, diff) / traj.d
    return Series(x=lag_arr.astype(np.float64), y=vals)


def log_derivative_beta(curve: MsdCurve, delta_tau: int = 20) -> BetaSeries:
    """Discrete log-log slope between lags tau and tau + delta_tau.

    Only lags whose partner tau + delta_tau is present in the curve
    contribute. Non-positive MSD values among the used points raise
    DomainError.
    """
    if delta_tau < 1:
        raise ArgumentError(f"delta_tau must be >= 1, got {delta_tau}")
    index = {int(t): float(v) for t, v in zip(curve.lags, curve.values)}
    lags_out = []
    betas = []
    for tau in curve.lags.tolist():
        partner = tau + delta_tau
        if partner not in index:
            continue
        y0 = index[tau]
        y1 = index[partner]
        if y0 <= 0 or y1 <= 0:
            raise DomainError(
                f"non-positive MSD at lag {tau if y0 <= 0 else partner}; "
                "log derivative undefined"
            )
        betas.append((math.log(y1) - math.log(y0)) / (math.log(partner) - math.log(tau)))
        lags_out.append(tau)
    return BetaSeries(
        lags=np.asarray(lags_out, dtype=np.int64),
        values=np.asarray(betas, dtype=np.float64),
        delta_tau=delta_tau,
    )


def fit_power_law(series: Series | MsdCurve, fit_range: tuple[float, float]) -> PowerLawFit:
    """Least-squares line in log10-log10 over points with x in fit_range."""
    if isinstance(series, MsdCurve):
        series = series.as_series()
    lo, hi = float(fit_range[0]), float(fit_range[1])
    if not (lo < hi):
        raise ArgumentError(f"fit range must satisfy lo < hi, got ({lo}, {hi})")
    sel = (series.x >= lo) & (series.x <= hi)
    if int(sel.sum()) < 5:
        raise ArgumentError(
            f"power-law fit needs at least 5 points in range, found {int(sel.sum())}"
        )
    x = series.x[sel]
    y = series.y[sel]
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("power-law fit requires positive x and y over the range")
    lx = np.log10(x)
    ly = np.log10(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return PowerLawFit(
        exponent=float(slope),
        log_prefactor=float(intercept),
        fit_range=(lo, hi),
        rmse=float(np.sqrt(np.mean(resid**2))),
    )


def detect_crossover_tau0(
    curve: MsdCurve,
    rmse_thresh: float = RMSE_THRESH,
    min_points: int = 5,
) -> CrossoverResult:
    """Smallest lag tau' such that fitting over [tau', tau_max] gives
    rmse < rmse_thresh. Scans candidate starts in ascending order."""
    if curve.lags.size < 20:
        raise ArgumentError(
            f"crossover detection needs >= 20 lags, got {curve.lags.size}"
        )
    if np.any(curve.values <= 0):
        raise DomainError("crossover detection requires positive MSD values")
    tau_max = int(curve.lags[-1])
    series = curve.as_series()
    for i, tau in enumerate(curve.lags.tolist()):
        if curve.lags.size - i < min_points:
            break
        fit = fit_power_law(series, (float(tau), float(tau_max)))
        if fit.rmse < rmse_thresh:
            return CrossoverResult(tau0=int(tau), tail_fit=fit, found=True)
    return CrossoverResult(tau0=tau_max, tail_fit=None, found=False)


def _window_scan_lags(traj: Trajectory, t_w: int, T: int) -> np.ndarray:
    hi = min(T, traj.n_steps - t_w)
    return np.arange(1, hi + 1, dtype=np.int64)


def _single_law_fit(curve: MsdCurve, rmse_thresh: float) -> PowerLawFit | None:
    """Full-range single power-law test used by the t0 scan.

    An identically zero curve is the frozen-walker limit: it qualifies with
    exponent 0 and an infinitely small prefactor. Curves with some (but not
    all) non-positive values cannot be log-fitted and never qualify.
    """
    if not np.any(curve.values > 0):
        return PowerLawFit(
            exponent=0.0,
            log_prefactor=-math.inf,
            fit_range=(float(curve.lags[0]), float(curve.lags[-1])),
            rmse=0.0,
        )
    if np.any(curve.values <= 0):
        return None
    if curve.lags.size < 5:
        return None
    fit = fit_power_law(curve, (float(curve.lags[0]), float(curve.lags[-1])))
    return fit if fit.rmse < rmse_thresh else None


def detect_regime_change_t0(
    traj: Trajectory,
    T: int,
    stride: int | None = None,
    rmse_thresh: float = RMSE_THRESH,
) -> RegimeChangeResult:
    """Slide the window start; t0 is the first start whose full-range MSD
    admits a single power law (rmse < rmse_thresh).

    The report also carries the lag crossover at the first window: alpha1
    fits lags up to tau0, alpha2 is the tail fit there, alpha3 the
    qualifying single-law exponent at t0. classification is
    "sub_super_sub" when alpha1, alpha3 lie in (0, 1) and alpha2 > 1,
    otherwise "atypical".
    """
    if T < 2:
        raise ArgumentError(f"T must be >= 2, got {T}")
    if traj.n_steps < T + 2:
        raise ArgumentError(
            f"trajectory of {traj.n_steps} steps too short for T={T}"
        )
    if stride is None:
        stride = max(1, T // 10)
    if stride < 1:
        raise ArgumentError(f"stride must be >= 1, got {stride}")

    t0 = None
    alpha3 = None
    for t_w in range(1, traj.n_steps - T + 1, stride):
        lags = _window_scan_lags(traj, t_w, T)
        if lags.size < 5:
            break
        curve = time_averaged_msd(traj, Window(t_w=t_w, T=T), lags=lags)
        fit = _single_law_fit(curve, rmse_thresh)
        if fit is not None:
            t0 = t_w
            alpha3 = fit.exponent
            break

    tau0 = None
    alpha1 = None
    alpha2 = None
    first = time_averaged_msd(traj, Window(t_w=1, T=T), lags=_window_scan_lags(traj, 1, T))
    if first.lags.size >= 20 and np.all(first.values > 0):
        cross = detect_crossover_tau0(first, rmse_thresh=rmse_thresh)
        if cross.found:
            tau0 = cross.tau0
            alpha2 = cross.tail_fit.exponent
            head = first.lags <= tau0
            if int(head.sum()) >= 5:
                alpha1 = fit_power_law(
                    first.as_series(), (float(first.lags[0]), float(tau0))
                ).exponent

    consistent = (
        alpha1 is not None
        and alpha2 is not None
        and alpha3 is not None
        and 0.0 < alpha1 < 1.0
        and alpha2 > 1.0
        and 0.0 < alpha3 < 1.0
    )
    report = RegimeReport(
        tau0=tau0,
        t0=t0,
        alpha1=alpha1,
        alpha2=alpha2,
        alpha3=alpha3,
        classification="sub_super_sub" if consistent else "atypical",
    )
    return RegimeChangeResult(t0=t0, report=report)
