"""Calibrate the statistical estimators against synthetic ground truth.

Each block generates data with a known parameter and reports what the
toolkit's estimator recovers:

  msd      ballistic and Brownian walks with exact exponents 2 and 1
  stable   CMS-sampled symmetric heavy tails over a grid of alpha
  hurst    1D midpoint-displacement profiles over a grid of H
  boxdim   filled square, straight line, Sierpinski carpet

Run all blocks or a subset: `python3 scripts/estimator_calibration.py msd hurst`.
Recovered values drifting outside the printed tolerances after a code
change is a regression, not noise; every block is seeded.
"""

import argparse
import sys

import numpy as np

from adlkit import (
    StableParams,
    Trajectory,
    Window,
    box_counting_dimension,
    fit_power_law,
    fit_stable_symmetric,
    msl,
    sample_stable,
    time_averaged_msd,
)


def midpoint_profile(n_levels: int, hurst: float, seed: int) -> np.ndarray:
    """1D fractional profile by midpoint displacement: 2^n_levels + 1
    points whose increments scale with exponent `hurst`."""
    rng = np.random.default_rng(seed)
    n = 2 ** n_levels
    y = np.zeros(n + 1)
    y[-1] = rng.standard_normal()
    scale = np.sqrt(1.0 - 2.0 ** (2.0 * hurst - 2.0))
    step = n
    for level in range(1, n_levels + 1):
        half = step // 2
        mids = np.arange(half, n, step)
        y[mids] = 0.5 * (y[mids - half] + y[mids + half])
        y[mids] += scale * 2.0 ** (-hurst * level) * rng.standard_normal(mids.size)
        step = half
    return y


def block_msd() -> None:
    n = 2000
    t = np.arange(1, n + 1, dtype=np.float64)
    ballistic = Trajectory(t[:, None] * np.array([0.3, -0.1]))
    curve = time_averaged_msd(ballistic, Window(1, n // 2))
    fit = fit_power_law(curve, (1, 500))
    print(f"  ballistic walk:      exponent {fit.exponent:.4f}   (truth 2, tol 0.01)")

    exps = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        steps = 0.5 * rng.standard_normal((n, 5))
        walk = Trajectory(np.cumsum(steps, axis=0))
        curve = time_averaged_msd(walk, Window(1, n // 2), lags=np.arange(1, 51))
        exps.append(fit_power_law(curve, (1, 50)).exponent)
    exps = np.array(exps)
    print(f"  brownian walk:       exponent {exps.mean():.4f} "
          f"+- {exps.std():.4f} over 20 seeds (truth 1, tol 0.05)")


def block_stable() -> None:
    for alpha in (1.2, 1.5, 1.9, 2.0):
        params = StableParams(alpha_dist=alpha, beta_skew=0.0, gamma=1.0, delta=0.0)
        x = sample_stable(params, 100_000, seed=int(alpha * 10))
        fit = fit_stable_symmetric(x)
        verdict = "gaussian wins" if fit.llr <= 0 else f"llr {fit.llr:.1f}"
        print(f"  alpha {alpha:.1f}:           recovered {fit.params.alpha_dist:.4f} "
              f"({verdict})   (tol 0.05)")


def block_hurst() -> None:
    for hurst in (0.3, 0.5, 0.7):
        fitted = []
        for seed in range(4):
            y = midpoint_profile(12, hurst, seed)
            frames = np.arange(y.size, dtype=np.float64)[:, None]
            traj = Trajectory(frames, losses=y)
            edges = np.geomspace(1.0, 256.0, 25)
            curve = msl(traj, Window(1, y.size - 1), bins=edges)
            fitted.append(curve.hurst)
        fitted = np.array(fitted)
        print(f"  H {hurst:.1f}:              recovered {fitted.mean():.4f} "
              f"+- {fitted.std():.4f} over 4 seeds (tol 0.05)")


def block_boxdim() -> None:
    square = np.ones((243, 243), dtype=bool)
    scales = np.array([1, 3, 9, 27, 81])
    d = box_counting_dimension(square, scales).dimension
    print(f"  filled square:       dimension {d:.4f}   (truth 2, tol 0.05)")

    line = np.zeros((64, 64), dtype=bool)
    line[32, :] = True
    d = box_counting_dimension(line, np.array([1, 2, 4, 8, 16])).dimension
    print(f"  straight line:       dimension {d:.4f}   (truth 1, tol 0.05)")

    carpet = np.ones((1, 1), dtype=bool)
    for _ in range(5):
        block = np.ones((3, 3), dtype=bool)
        block[1, 1] = False
        carpet = np.kron(block, carpet)
    d = box_counting_dimension(carpet, scales).dimension
    print(f"  sierpinski carpet:   dimension {d:.4f}   (truth 1.8928, tol 0.08)")


BLOCKS = {
    "msd": block_msd,
    "stable": block_stable,
    "hurst": block_hurst,
    "boxdim": block_boxdim,
}


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("blocks", nargs="*", choices=[*BLOCKS, []],
                   help="subset of blocks to run (default: all)")
    args = p.parse_args(argv)
    for name in args.blocks or BLOCKS:
        print(f"{name}:")
        BLOCKS[name]()
    return 0


if __name__ == "__main__":
    sys.exit(main())
