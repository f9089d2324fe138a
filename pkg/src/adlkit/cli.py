"""Command-line surface: landscape generation, simulation, analysis
subcommands, and the end-to-end toy-experiment pipeline.

Exit codes: 0 success, 1 usage error, 2 data/format/domain error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .adt1 import read_trajectory, write_trajectory
from .errors import ToolkitError
from .landscape import (
    box_counting_dimension,
    default_scales,
    generate_fractal_terrain,
    level_contour,
    make_convex_paraboloid,
    shuffle_and_smooth,
)
from .msd import detect_regime_change_t0, fit_power_law, log_derivative_beta, time_averaged_msd
from .pathfractal import msl, path_scaling
from .serialize import (
    RunManifest,
    read_field_csv,
    write_columns_csv,
    write_field_csv,
    write_json,
    write_manifest,
)
from .simulate import SimConfig, run_sgd
from .stable import fit_stable_symmetric, gradient_pool, moving_variance
from .toymodel import ToyModelConfig, run_toy_model
from .trajectory import Window, loss_series

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; this tool reserves 2 for
    data errors and uses 1 for usage problems."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _twindow(text: str) -> tuple[int, int]:
    try:
        t_w, T = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected t_w,T integers, got {text!r}")
    if t_w < 1 or T < 1:
        raise argparse.ArgumentTypeError(f"window start and length must be >= 1, got {text!r}")
    return t_w, T


def _scan_lags(traj, t_w: int, T: int) -> np.ndarray:
    return np.arange(1, min(T, traj.n_steps - t_w) + 1, dtype=np.int64)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adl", description=__doc__)
    parser.add_argument("--version", action="version", version=f"adl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-landscape", help="generate or derive a landscape CSV")
    p.add_argument("--kind", required=True, choices=("fractal", "convex", "shuffled"))
    p.add_argument("--n", type=int, default=257, help="grid side (fractal needs 2^k+1)")
    p.add_argument("--roughness", type=float, default=0.5, help="fractal roughness in (0,1)")
    p.add_argument("--curvature", type=float, default=1.0, help="paraboloid curvature")
    p.add_argument("--kernel-sigma", type=float, default=8.0, help="smoothing stddev, cells")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--source", help="input field CSV (kind=shuffled only)")
    p.add_argument("--out", required=True, help="output field CSV")
    p.set_defaults(func=_cmd_gen_landscape)

    p = sub.add_parser("simulate", help="run the walker on a landscape")
    p.add_argument("--field", required=True, help="landscape CSV")
    p.add_argument("--config", required=True, help="JSON with eta/sigma/n_steps/seed/start/boundary")
    p.add_argument("--out", required=True, help="output trajectory file")
    p.add_argument("--manifest", help="manifest path (default: OUT.manifest.json)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="analysis subcommands")
    asub = p.add_subparsers(dest="analysis", required=True, parser_class=_Parser)

    def common(ap, twindow=True):
        ap.add_argument("input", help="input file")
        ap.add_argument("output", help="output file")
        if twindow:
            ap.add_argument("--twindow", type=_twindow, default=(1, 1000),
                            metavar="TW,T", help="window start and length (default 1,1000)")

    a = asub.add_parser("msd", help="time-averaged MSD curve")
    common(a)
    a.set_defaults(func=_cmd_msd)

    a = asub.add_parser("beta", help="logarithmic MSD derivative")
    common(a)
    a.add_argument("--delta-tau", type=int, default=20)
    a.set_defaults(func=_cmd_beta)

    a = asub.add_parser("regimes", help="regime boundary and exponents")
    common(a, twindow=False)
    a.add_argument("--T", type=int, default=1000, help="window length")
    a.add_argument("--stride", type=int, default=None, help="window stride (default T/10)")
    a.add_argument("--rmse", type=float, default=0.03, help="single-law RMSE threshold")
    a.set_defaults(func=_cmd_regimes)

    a = asub.add_parser("gradients", help="heavy-tail fit of pooled gradients")
    common(a)
    a.add_argument("--loss-variance", metavar="OUT.csv", default=None,
                   help="also write the sliding variance of the loss channel")
    a.add_argument("--variance-window", type=int, default=100,
                   help="sliding-variance window length (default 100)")
    a.set_defaults(func=_cmd_gradients)

    a = asub.add_parser("path", help="contour vs end-to-end path scaling")
    common(a)
    a.add_argument("--smoothing", type=int, default=40, help="moving-average window")
    a.set_defaults(func=_cmd_path)

    a = asub.add_parser("msl", help="mean squared loss difference vs separation")
    common(a)
    a.add_argument("--bins", type=int, default=32)
    a.add_argument("--min-pairs", type=int, default=50)
    a.add_argument("--seed", type=int, default=0, help="pair-subsampling seed")
    a.set_defaults(func=_cmd_msl)

    a = asub.add_parser("boxdim", help="box-counting dimension of a landscape contour")
    common(a, twindow=False)
    a.add_argument("--level", type=float, default=None, help="level-set value (default median)")
    a.set_defaults(func=_cmd_boxdim)

    p = sub.add_parser("reproduce-fig6", help="run the full toy-model pipeline")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seeds", type=int, default=10, help="number of trials")
    p.add_argument("--eta", type=float, default=0.02)
    p.add_argument("--sigma", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--n", type=int, default=129, help="landscape grid side")
    p.add_argument("--roughness", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument(
        "--landscape-seed", type=int, default=212,
        help="terrain seed (negative scans for a qualifying terrain)",
    )
    p.set_defaults(func=_cmd_fig6)

    return parser


def _cmd_gen_landscape(args) -> int:
    if args.kind == "fractal":
        field = generate_fractal_terrain(n=args.n, roughness=args.roughness, seed=args.seed)
    elif args.kind == "convex":
        field = make_convex_paraboloid(n=args.n, curvature=args.curvature)
    else:
        if not args.source:
            raise ToolkitError("--kind shuffled requires --source FIELD.csv")
        field = shuffle_and_smooth(read_field_csv(args.source),
                                   kernel_sigma=args.kernel_sigma, seed=args.seed)
    write_field_csv(args.out, field)
    print(f"wrote {args.out} ({field.kind}, n={field.n})")
    return 0


def _cmd_simulate(args) -> int:
    field = read_field_csv(args.field)
    with open(args.config, "r", encoding="utf-8") as fh:
        config = SimConfig.from_dict(json.load(fh))
    result = run_sgd(field, config)
    write_trajectory(result.trajectory, args.out)
    manifest_path = args.manifest or f"{args.out}.manifest.json"
    write_manifest(manifest_path, RunManifest(
        config={"field": os.path.abspath(args.field), "sim": config.to_dict()},
        tool_version=__version__,
        seeds=[config.seed],
        outputs=[os.path.basename(args.out)],
    ))
    print(f"wrote {args.out}: {result.trajectory.n_steps} frames"
          + (" (escaped)" if result.escaped else ""))
    return 0


def _cmd_msd(args) -> int:
    traj = read_trajectory(args.input)
    t_w, T = args.twindow
    curve = time_averaged_msd(traj, Window(t_w=t_w, T=T), lags=_scan_lags(traj, t_w, T))
    write_columns_csv(args.output, ("tau", "msd"), (curve.lags, curve.values))
    fit = fit_power_law(curve, (float(curve.lags[0]), float(curve.lags[-1])))
    print(f"wrote {args.output}: {curve.lags.size} lags, fitted exponent {fit.exponent:.3f}")
    return 0


def _cmd_beta(args) -> int:
    traj = read_trajectory(args.input)
    t_w, T = args.twindow
    curve = time_averaged_msd(traj, Window(t_w=t_w, T=T), lags=_scan_lags(traj, t_w, T))
    beta = log_derivative_beta(curve, delta_tau=args.delta_tau)
    write_columns_csv(args.output, ("tau", "beta"), (beta.lags, beta.values))
    print(f"wrote {args.output}: {beta.lags.size} lags")
    return 0


def _cmd_regimes(args) -> int:
    traj = read_trajectory(args.input)
    result = detect_regime_change_t0(traj, T=args.T, stride=args.stride,
                                     rmse_thresh=args.rmse)
    write_json(args.output, result.report)
    print(f"wrote {args.output}: t0={result.t0}, "
          f"classification={result.report.classification}")
    return 0


def _cmd_gradients(args) -> int:
    traj = read_trajectory(args.input)
    t_w, T = args.twindow
    fit = fit_stable_symmetric(gradient_pool(traj, Window(t_w=t_w, T=T)))
    write_json(args.output, fit)
    print(f"wrote {args.output}: alpha={fit.params.alpha_dist:.4f}, "
          f"llr={fit.llr:.3g}, vuong_p={fit.vuong_p:.3g}")
    if args.loss_variance is not None:
        var = moving_variance(loss_series(traj), window=args.variance_window)
        write_columns_csv(args.loss_variance, ("t", "variance"), (var.x, var.y))
        print(f"wrote {args.loss_variance}: {var.x.size} windows")
    return 0


def _cmd_path(args) -> int:
    traj = read_trajectory(args.input)
    t_w, T = args.twindow
    result = path_scaling(traj, Window(t_w=t_w, T=T), smoothing=args.smoothing)
    if args.output.endswith(".csv"):
        write_columns_csv(args.output, ("ds", "dr2"), (result.ds_dr2.x, result.ds_dr2.y))
    else:
        write_json(args.output, result)
    print(f"wrote {args.output}: lambda_short={result.lambda_short:.3f}, "
          f"lambda_long={result.lambda_long:.3f}")
    return 0


def _cmd_msl(args) -> int:
    traj = read_trajectory(args.input)
    t_w, T = args.twindow
    curve = msl(traj, Window(t_w=t_w, T=T), bins=args.bins,
                min_pairs=args.min_pairs, seed=args.seed)
    if args.output.endswith(".csv"):
        write_columns_csv(args.output, ("bin_center", "msl", "pairs"),
                          (curve.bin_centers, curve.msl, curve.pair_counts))
    else:
        write_json(args.output, curve)
    hurst = curve.hurst
    print(f"wrote {args.output}: {curve.bin_centers.size} bins"
          + (f", hurst={hurst:.3f}" if hurst is not None else ""))
    return 0


def _cmd_boxdim(args) -> int:
    field = read_field_csv(args.input)
    mask = level_contour(field, level=args.level)
    result = box_counting_dimension(mask, default_scales(field.n))
    write_json(args.output, result)
    print(f"wrote {args.output}: dimension={result.dimension:.4f}")
    return 0


def _cmd_fig6(args) -> int:
    config = ToyModelConfig(
        eta=args.eta, sigma=args.sigma, n_steps=args.steps, trials=args.seeds,
        landscape_n=args.n, roughness=args.roughness, seed=args.seed,
        landscape_seed=None if args.landscape_seed < 0 else args.landscape_seed,
    )
    report = run_toy_model(config)
    os.makedirs(args.out, exist_ok=True)
    outputs = []

    def emit_curve(name, series):
        if series is None:
            return
        write_columns_csv(os.path.join(args.out, name), ("tau", "msd"),
                          (series.x, series.y))
        outputs.append(name)

    emit_curve("msd_pre.csv", report.msd_pre)
    emit_curve("msd_post.csv", report.msd_post)
    emit_curve("convex_msd.csv", report.convex.msd)
    emit_curve("shuffled_msd.csv", report.shuffled.msd)

    write_json(os.path.join(args.out, "grad_fit.json"), report.gradient_fit)
    outputs.append("grad_fit.json")

    summary = {
        "landscape_seed": report.landscape_seed,
        "minimum": report.minimum,
        "trials": report.trials,
        "n_regime_pass": report.n_regime_pass,
        "alpha_dist": report.gradient_fit.params.alpha_dist,
        "llr": report.gradient_fit.llr,
        "convex_alpha": report.convex.alpha,
        "convex_alpha_dist": (
            report.convex.gradient_fit.params.alpha_dist
            if report.convex.gradient_fit is not None else None
        ),
        "shuffled_alpha": report.shuffled.alpha,
        "shuffled_trap_fraction": report.shuffled.trap_fraction,
    }
    write_json(os.path.join(args.out, "summary.json"), summary)
    outputs.append("summary.json")

    write_manifest(os.path.join(args.out, "manifest.json"), RunManifest(
        config=config.__dict__,
        tool_version=__version__,
        seeds=list(range(config.seed, config.seed + config.trials)),
        outputs=outputs,
    ))
    print(f"wrote {args.out}: {report.n_regime_pass}/{config.trials} regime-consistent "
          f"trials, pooled alpha={report.gradient_fit.params.alpha_dist:.3f}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"adl: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"adl: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
