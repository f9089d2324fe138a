"""End-to-end toy experiment: noisy gradient descent on a rough terrain
with a wide minimum, plus convex and shuffled-smoothed control runs.

The pipeline fixes (or scans for) a terrain that offers a wide low-lying
minimum away from the border, releases walkers from random high-altitude
starts, splits each trajectory at the step where the walker enters the
basin it finally settles in, and contrasts the diffusion exponents and
the pooled gradient tails against the two controls.

Protocol notes, calibrated once and then frozen:

* Basin entry is detected against the minimum nearest to the walker's
  final position, not a single shared target; different walkers settle
  in different basins of the same terrain.
* Gradient pools are taken over the settled second half of each run.
  The first half mixes the approach transient into the sample; on the
  convex control that transient is an exponentially decaying pull whose
  scale mixture masquerades as a heavy tail and inverts the comparison.
* The convex control's exponent is fitted on early lags, well inside the
  contraction horizon 1/(2*eta*curvature), where the slide is ballistic.
* The shuffled control reuses the fractal runs' start positions (matched
  controls). Its own high-altitude region hugs the border, where reflect
  clamping pins walkers into corner pockets that are not minima of the
  field. Its exponent is fitted on the settled second half, after the
  descent transient.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import DataError
from .landscape import (
    HeightField,
    Minimum,
    detect_minima,
    generate_fractal_terrain,
    make_convex_paraboloid,
    shuffle_and_smooth,
)
from .msd import fit_power_law, time_averaged_msd
from .simulate import RANDOM_HIGH_START, SimConfig, SimResult, detect_entry_time, run_sgd
from .stable import StableFit, fit_stable_symmetric, gradient_pool
from .trajectory import Series, Window

__all__ = [
    "ToyModelConfig",
    "TrialOutcome",
    "ControlOutcome",
    "ToyModelReport",
    "select_fractal_landscape",
    "run_toy_model",
]

# entry gates: pre-entry window needs a few lags, post-entry a stable tail
_MIN_ENTRY = 8
_MIN_POST = 60


@dataclass(frozen=True)
class ToyModelConfig:
    eta: float = 0.02
    sigma: float = 0.01
    n_steps: int = 1000
    trials: int = 10
    landscape_n: int = 129
    roughness: float = 0.9
    width_min: float = 0.06
    value_max: float = 0.12
    margin: float = 0.15
    curvature: float = 0.25
    dwell: int = 50
    seed: int = 0
    # terrain seed 212 is the calibrated default; None scans from `seed`
    landscape_seed: int | None = 212
    shuffle_seed: int = 1


@dataclass(frozen=True)
class TrialOutcome:
    seed: int
    entry_step: int | None
    alpha_pre: float | None
    alpha_post: float | None

    @property
    def regime_pass(self) -> bool:
        return (
            self.alpha_pre is not None
            and self.alpha_post is not None
            and self.alpha_pre > 1.0
            and self.alpha_post < 1.0
        )


@dataclass(frozen=True)
class ControlOutcome:
    kind: str
    alpha: float
    msd: Series
    trap_fraction: float | None = None
    gradient_fit: StableFit | None = None


@dataclass(frozen=True)
class ToyModelReport:
    config: ToyModelConfig
    landscape_seed: int
    minimum: Minimum
    trials: list
    gradient_fit: StableFit
    convex: ControlOutcome
    shuffled: ControlOutcome
    msd_pre: Series | None
    msd_post: Series | None
    runs: tuple = dataclass_field(default=(), repr=False)

    @property
    def n_regime_pass(self) -> int:
        return sum(1 for t in self.trials if t.regime_pass)


def _qualifying_minimum(
    field: HeightField, width_min: float, value_max: float, margin: float
) -> Minimum | None:
    """Widest minimum that is low (value <= value_max), wide, and at least
    margin away from every border; None if the terrain offers none."""
    lo, hi = margin, field.extent - margin
    best = None
    for m in detect_minima(field):
        if m.value > value_max or m.width_estimate < width_min:
            continue
        if not (lo <= m.position[0] <= hi and lo <= m.position[1] <= hi):
            continue
        if best is None or m.width_estimate > best.width_estimate:
            best = m
    return best


def select_fractal_landscape(
    n: int,
    roughness: float,
    width_min: float,
    margin: float,
    base_seed: int = 0,
    max_tries: int = 64,
    value_max: float = 0.12,
) -> tuple[HeightField, Minimum]:
    """First terrain (scanning seeds from base_seed) offering a low-lying
    minimum at least width_min wide and at least margin from every border."""
    for seed in range(base_seed, base_seed + max_tries):
        field = generate_fractal_terrain(n=n, roughness=roughness, seed=seed)
        m = _qualifying_minimum(field, width_min, value_max, margin)
        if m is not None:
            return field, m
    raise DataError(
        f"no terrain with a minimum of width >= {width_min} and value <= "
        f"{value_max} found in {max_tries} seeds from {base_seed}"
    )


def _msd_exponent(traj, t_w: int, T: int) -> float | None:
    """Power-law exponent of the time-averaged MSD over window (t_w, T),
    fitted on the first quarter of the available lags (at least 6)."""
    hi = max(6, T // 4)
    lags = np.arange(1, min(max(7, T // 4), T, traj.n_steps - t_w) + 1, dtype=np.int64)
    curve = time_averaged_msd(traj, Window(t_w=t_w, T=T), lags=lags)
    if not np.all(curve.values > 0):
        return None
    try:
        return fit_power_law(curve, (1.0, float(hi))).exponent
    except Exception:
        return None


def _window_msd(traj, t_w: int, T: int, lag_hi: int):
    lags = np.arange(1, min(lag_hi, T, traj.n_steps - t_w) + 1, dtype=np.int64)
    return time_averaged_msd(traj, Window(t_w=t_w, T=T), lags=lags)


def _mean_curve(curves) -> Series | None:
    curves = [c for c in curves if c is not None]
    if not curves:
        return None
    common = min(c.lags.size for c in curves)
    if common < 2:
        return None
    stack = np.stack([c.values[:common] for c in curves])
    return Series(x=curves[0].lags[:common].astype(np.float64), y=stack.mean(axis=0))


def _settled_window(n_steps: int) -> Window:
    return Window(t_w=n_steps // 2 + 1, T=n_steps - n_steps // 2 - 1 + 1)


def _nearest_minimum(minima, point) -> Minimum | None:
    if not minima:
        return None
    dists = [float(np.linalg.norm(np.asarray(m.position) - point)) for m in minima]
    return minima[int(np.argmin(dists))]


def _analyze_trial(
    result: SimResult, minima, dwell: int, seed: int
) -> tuple[TrialOutcome, Series | None, Series | None]:
    traj = result.trajectory
    n = traj.n_steps
    final_min = _nearest_minimum(minima, traj.frames[-1])
    entry = None if final_min is None else detect_entry_time(result, final_min, dwell=dwell)
    pre_curve = post_curve = None
    alpha_pre = alpha_post = None
    if entry is not None and _MIN_ENTRY <= entry <= n - _MIN_POST:
        alpha_pre = _msd_exponent(traj, 1, entry - 1)
        alpha_post = _msd_exponent(traj, entry, n - entry)
        pre_curve = _window_msd(traj, 1, entry - 1, max(7, entry // 4))
        post_curve = _window_msd(traj, entry, n - entry, max(7, (n - entry) // 4))
    return (
        TrialOutcome(seed=seed, entry_step=entry, alpha_pre=alpha_pre, alpha_post=alpha_post),
        pre_curve,
        post_curve,
    )


def run_toy_model(config: ToyModelConfig = ToyModelConfig()) -> ToyModelReport:
    if config.landscape_seed is not None:
        field = generate_fractal_terrain(
            n=config.landscape_n, roughness=config.roughness, seed=config.landscape_seed
        )
        minimum = _qualifying_minimum(field, config.width_min, config.value_max, config.margin)
        if minimum is None:
            raise DataError(
                f"terrain seed {config.landscape_seed} has no minimum of width >= "
                f"{config.width_min} and value <= {config.value_max} inside the margin"
            )
    else:
        field, minimum = select_fractal_landscape(
            n=config.landscape_n,
            roughness=config.roughness,
            width_min=config.width_min,
            margin=config.margin,
            base_seed=config.seed,
            value_max=config.value_max,
        )
    minima = detect_minima(field)
    seeds = list(range(config.seed, config.seed + config.trials))
    settled = _settled_window(config.n_steps)

    trials = []
    runs = []
    pre_curves = []
    post_curves = []
    pools = []
    for seed in seeds:
        result = run_sgd(field, SimConfig(
            eta=config.eta, sigma=config.sigma, n_steps=config.n_steps,
            seed=seed, start=RANDOM_HIGH_START,
        ))
        outcome, pre_curve, post_curve = _analyze_trial(result, minima, config.dwell, seed)
        trials.append(outcome)
        runs.append(result)
        pre_curves.append(pre_curve)
        post_curves.append(post_curve)
        pools.append(gradient_pool(result.trajectory, settled))

    gradient_fit = fit_stable_symmetric(np.concatenate(pools))

    convex = _convex_control(config, seeds, settled)
    starts = [np.array(r.trajectory.frames[0], copy=True) for r in runs]
    shuffled = _shuffled_control(config, field, seeds, starts)

    return ToyModelReport(
        config=config,
        landscape_seed=field.seed,
        minimum=minimum,
        trials=trials,
        gradient_fit=gradient_fit,
        convex=convex,
        shuffled=shuffled,
        msd_pre=_mean_curve(pre_curves),
        msd_post=_mean_curve(post_curves),
        runs=tuple(runs),
    )


def _convex_control(config: ToyModelConfig, seeds, settled: Window) -> ControlOutcome:
    """Walkers sliding down a paraboloid move ballistically until the
    contraction time 1/(2*eta*curvature); the exponent is fitted on lags
    well inside that horizon. Gradients are pooled over the settled half,
    where the walker rattles in the noise ball around the center."""
    field = make_convex_paraboloid(n=config.landscape_n, curvature=config.curvature)
    relax = 1.0 / (2.0 * config.eta * config.curvature)
    fit_hi = max(6.0, relax / 5.0)
    t_span = min(config.n_steps // 2, int(2 * relax))
    curves = []
    pools = []
    for seed in seeds:
        result = run_sgd(field, SimConfig(
            eta=config.eta, sigma=config.sigma, n_steps=config.n_steps,
            seed=seed, start=RANDOM_HIGH_START,
        ))
        curves.append(_window_msd(result.trajectory, 1, t_span, t_span))
        pools.append(gradient_pool(result.trajectory, settled))
    mean = _mean_curve(curves)
    alpha = fit_power_law(mean, (1.0, fit_hi)).exponent
    return ControlOutcome(
        kind="convex", alpha=alpha, msd=mean,
        gradient_fit=fit_stable_symmetric(np.concatenate(pools)),
    )


def _shuffled_control(
    config: ToyModelConfig, source: HeightField, seeds, starts
) -> ControlOutcome:
    """On the shuffled-then-smoothed terrain a walker released from the
    matched start drops into a nearby shallow basin and stays. The
    exponent is fitted over the settled second half; trapping is checked
    as final distance to the nearest minimum within 3x its width."""
    field = shuffle_and_smooth(source, kernel_sigma=8.0, seed=config.shuffle_seed)
    minima = detect_minima(field)
    half = _settled_window(config.n_steps)
    lag_hi = max(6, half.T // 4)
    curves = []
    trapped = 0
    for seed, start in zip(seeds, starts):
        result = run_sgd(field, SimConfig(
            eta=config.eta, sigma=config.sigma, n_steps=config.n_steps,
            seed=seed, start=tuple(start),
        ))
        curves.append(_window_msd(result.trajectory, half.t_w, half.T, lag_hi))
        nearest = _nearest_minimum(minima, result.trajectory.frames[-1])
        if nearest is not None:
            d = float(np.linalg.norm(np.asarray(nearest.position) - result.trajectory.frames[-1]))
            if d <= 3.0 * nearest.width_estimate:
                trapped += 1
    mean = _mean_curve(curves)
    alpha = fit_power_law(mean, (1.0, float(lag_hi))).exponent
    return ControlOutcome(
        kind="shuffled_smoothed", alpha=alpha, msd=mean,
        trap_fraction=trapped / len(seeds),
    )
