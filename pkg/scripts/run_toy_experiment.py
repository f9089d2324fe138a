"""Run the full toy-model experiment and print a per-trial report.

Generates (or scans for) a rough terrain with a wide low minimum, runs
the noisy-gradient walker from high-altitude starts over many trials,
and prints the per-trial basin entries with pre/post MSD exponents, the
pooled heavy-tail gradient fit, and both landscape controls (convex
paraboloid, shuffled-smoothed). The batch CSV emitter lives in the CLI
(`adl reproduce-fig6`); this script is the verbose console companion
for eyeballing a single protocol run or a parameter tweak.
"""

import argparse
import sys

from adlkit import ToyModelConfig, run_toy_model


def parse_args(argv):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--eta", type=float, default=0.02, help="learning rate")
    p.add_argument("--sigma", type=float, default=0.01, help="gradient noise scale")
    p.add_argument("--steps", type=int, default=1000, help="updates per trial")
    p.add_argument("--trials", type=int, default=10, help="number of seeded trials")
    p.add_argument("--n", type=int, default=129, help="terrain grid size")
    p.add_argument("--roughness", type=float, default=0.9,
                   help="terrain Hurst roughness in (0, 1)")
    p.add_argument("--landscape-seed", type=int, default=212,
                   help="terrain seed (negative scans for a qualifying terrain)")
    p.add_argument("--seed", type=int, default=0, help="first trial seed")
    return p.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    config = ToyModelConfig(
        eta=args.eta, sigma=args.sigma, n_steps=args.steps, trials=args.trials,
        landscape_n=args.n, roughness=args.roughness, seed=args.seed,
        landscape_seed=None if args.landscape_seed < 0 else args.landscape_seed,
    )
    report = run_toy_model(config)

    m = report.minimum
    print(f"terrain seed {report.landscape_seed}: target minimum at "
          f"({m.position[0]:.3f}, {m.position[1]:.3f}), value {m.value:.4f}, "
          f"width {m.width_estimate:.4f}")
    print()
    print(f"{'trial':>5} {'entry':>6} {'alpha_pre':>10} {'alpha_post':>11} {'regime':>7}")
    for t in report.trials:
        entry = f"{t.entry_step}" if t.entry_step is not None else "-"
        pre = f"{t.alpha_pre:.3f}" if t.alpha_pre is not None else "-"
        post = f"{t.alpha_post:.3f}" if t.alpha_post is not None else "-"
        verdict = "pass" if t.regime_pass else ("skip" if t.alpha_pre is None else "fail")
        print(f"{t.seed:>5} {entry:>6} {pre:>10} {post:>11} {verdict:>7}")
    print(f"\nregime-consistent trials: {report.n_regime_pass}/{config.trials}")

    fit = report.gradient_fit
    lo, hi = fit.ci_alpha
    print(f"pooled gradient fit: alpha={fit.params.alpha_dist:.4f} "
          f"[{lo:.4f}, {hi:.4f}], llr={fit.llr:.1f}, "
          f"vuong p={fit.vuong_p:.2e}, n={fit.n}")

    cv = report.convex
    cv_alpha = (f", gradient alpha={cv.gradient_fit.params.alpha_dist:.4f}"
                if cv.gradient_fit is not None else "")
    print(f"convex control:      MSD exponent {cv.alpha:.3f}{cv_alpha}")
    sh = report.shuffled
    print(f"shuffled control:    MSD exponent {sh.alpha:.3f}, "
          f"trapped {sh.trap_fraction:.0%} of trials")
    return 0


if __name__ == "__main__":
    sys.exit(main())
