"""Full diagnostic battery on one optimizer trajectory.

Reads a binary trajectory container (or simulates a fresh walker run on
a rough terrain when no file is given) and prints every diagnostic the
toolkit computes: time-averaged MSD with a power-law fit, the local
log-derivative exponent, the window-scan changepoint, a heavy-tailed
stable fit of pooled gradient components, path-scaling dimensions, and
the loss-roughness Hurst exponent. This is the quick-look tool for a
trajectory exported from a real training run.
"""

import argparse
import sys

import numpy as np

from adlkit import (
    SimConfig,
    Trajectory,
    Window,
    detect_regime_change_t0,
    fit_power_law,
    fit_stable_symmetric,
    generate_fractal_terrain,
    gradient_pool,
    log_derivative_beta,
    msl,
    path_scaling,
    read_trajectory,
    run_sgd,
    time_averaged_msd,
)


def demo_trajectory(seed: int) -> Trajectory:
    field = generate_fractal_terrain(129, 0.9, seed=212)
    result = run_sgd(field, SimConfig(eta=0.02, sigma=0.01, n_steps=1000, seed=seed))
    return result.trajectory


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("trajectory", nargs="?", help="binary trajectory file "
                   "(omitted: simulate a fresh 1000-step walker run)")
    p.add_argument("--seed", type=int, default=1, help="walker seed for the demo run")
    p.add_argument("--T", type=int, default=None,
                   help="analysis window length (default: half the run)")
    args = p.parse_args(argv)

    if args.trajectory:
        traj = read_trajectory(args.trajectory)
        print(f"{args.trajectory}: d={traj.d}, {traj.n_steps} frames, "
              f"loss={'yes' if traj.losses is not None else 'no'}, "
              f"gradient={'yes' if traj.gradients is not None else 'no'}")
    else:
        traj = demo_trajectory(args.seed)
        print(f"demo run: d={traj.d}, {traj.n_steps} frames (walker seed {args.seed})")

    n = traj.n_steps - 1
    T = args.T or n // 2
    early = Window(1, T)
    late = Window(n - T + 1, T)

    for label, window in (("early", early), ("late", late)):
        hi = max(6, T // 4)
        curve = time_averaged_msd(traj, window, lags=np.arange(1, hi + 1))
        fit = fit_power_law(curve, (1, hi))
        beta = log_derivative_beta(curve, delta_tau=max(2, min(20, T // 10)))
        finite = beta.values[np.isfinite(beta.values)]
        print(f"{label} window ({window.t_w}, T={window.T}): "
              f"MSD exponent {fit.exponent:.3f} on lags [1, {hi}], "
              f"beta range [{finite.min():.2f}, {finite.max():.2f}]")

    if traj.n_steps >= T + 2:
        result = detect_regime_change_t0(traj, T=T)
        if result.t0 is None:
            print(f"regime scan (T={T}): no single-law window found")
        else:
            r = result.report
            print(f"regime scan (T={T}): first single-law window starts at "
                  f"t0={result.t0} ({r.classification}, alpha3={r.alpha3:.3f})")

    if traj.gradients is not None:
        settled = Window(n // 2 + 1, n - n // 2)
        fit = fit_stable_symmetric(gradient_pool(traj, settled))
        side = "heavy-tailed" if fit.llr > 0 else "gaussian"
        print(f"gradient components (settled half, n={fit.n}): "
              f"alpha={fit.params.alpha_dist:.4f}, llr={fit.llr:.1f} ({side})")

    path = path_scaling(traj, Window(1, n))
    cross = (f", crossover at ds={path.crossover_l:.3g}"
             if path.crossover_l is not None else "")
    print(f"path scaling: D_f short {path.d_f_short:.3f}, "
          f"long {path.d_f_long:.3f}{cross}")

    if traj.losses is not None:
        curve = msl(traj, Window(1, n))
        if curve.hurst is not None:
            print(f"loss roughness: Hurst {curve.hurst:.3f} "
                  f"over {int(curve.pair_counts.sum())} pairs")

    return 0


if __name__ == "__main__":
    sys.exit(main())
