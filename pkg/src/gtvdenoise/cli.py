"""Command-line front end: denoise, bench-approx, sweep-mu.

Exit codes: 0 on success, 1 on I/O or file-format failure, 2 on invalid
flags or flag values. Metrics go to stdout as ``key=value`` lines; CSV
tables go to ``--output`` (``-`` for stdout); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import bench as bench_mod
from .fileio import load_feature_file, load_mu
from .filters import FilterSpec
from .images import add_awgn, load_image, psnr, save_image, ssim
from .pipeline import DenoiserConfig, denoise_image

__all__ = ["main", "entry"]

_SOLVER_NAMES = {
    "exact": "exact_eig",
    "cg": "linear_solve",
    "lanczos": "lanczos",
    "chebyshev": "chebyshev",
}


def _add_denoise_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sigma", type=float, default=25.0, help="noise std on the 0-255 scale")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--blocks", type=int, default=6)
    p.add_argument("--mu", default="0.5", help="filter strength: scalar or strengths-file path")
    p.add_argument(
        "--features",
        default="handcrafted",
        help="'handcrafted' or feature-file path(s), comma-separated one per layer",
    )
    p.add_argument("--epsilon", type=float, default=0.3)
    p.add_argument("--rho", type=float, default=0.01)
    p.add_argument("--solver", choices=sorted(_SOLVER_NAMES), default="lanczos")
    p.add_argument("--order", type=int, default=20)
    p.add_argument("--patch-size", type=int, default=36)
    p.add_argument("--stride", type=int, default=36)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--location-scale", type=float, default=0.1)
    p.add_argument("--intensity-scale", type=float, default=1.0)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gtvdenoise",
        description="Graph total-variation image denoising and its benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("denoise", help="add noise to an image, denoise it, report metrics")
    d.add_argument("--input", required=True)
    d.add_argument("--output", required=True)
    _add_denoise_flags(d)

    b = sub.add_parser("bench-approx", help="accuracy of filter approximations per order")
    b.add_argument("--trials", type=int, default=1000)
    b.add_argument("--orders", default="1..20", help="comma list and a..b ranges, e.g. 1..20")
    b.add_argument("--nodes", type=int, default=1296)
    b.add_argument("--mu", type=float, default=0.5)
    b.add_argument("--epsilon", type=float, default=0.3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--output", default="-", help="accuracy CSV path, - for stdout")
    b.add_argument(
        "--time-output",
        default=None,
        help="also measure wall-clock per apply and write this CSV (not seed-reproducible)",
    )

    s = sub.add_parser("sweep-mu", help="denoise at several strengths, tabulate quality")
    s.add_argument("--input", required=True)
    s.add_argument("--mu-grid", required=True, help="comma-separated strengths")
    s.add_argument("--output", default="-", help="CSV path, - for stdout")
    _add_denoise_flags(s)
    return parser


def _parse_orders(text: str) -> tuple:
    orders = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            orders.extend(range(int(lo), int(hi) + 1))
        elif part:
            orders.append(int(part))
    return tuple(orders)


def _denoiser_config(args) -> DenoiserConfig:
    if args.sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if args.patch_size < 1 or args.stride < 1:
        raise ValueError("patch size and stride must be >= 1")
    if args.threads < 1:
        raise ValueError("threads must be >= 1")
    try:
        fixed_mu = float(args.mu)
    except ValueError:
        fixed_mu = 0.5  # per-patch file takes over; keep a valid placeholder
    return DenoiserConfig(
        layers=args.layers,
        blocks_per_layer=args.blocks,
        epsilon=args.epsilon,
        rho=args.rho,
        filter=FilterSpec(mu=fixed_mu, method=_SOLVER_NAMES[args.solver], order=args.order),
        location_scale=args.location_scale,
        intensity_scale=args.intensity_scale,
    )


def _load_inputs(args):
    """Resolve --mu and --features values that name files."""
    mu_values = None
    try:
        float(args.mu)
    except ValueError:
        mu_values = load_mu(args.mu)
    feature_maps = None
    if args.features != "handcrafted":
        paths = [p for p in args.features.split(",") if p]
        maps = [load_feature_file(p) for p in paths]
        if len(maps) == 1 and args.layers > 1:
            maps = maps * args.layers
        feature_maps = maps
    return mu_values, feature_maps


def _denoise_once(args, clean, config, mu_values, feature_maps):
    noisy = add_awgn(clean, args.sigma, args.seed)
    denoised = denoise_image(
        noisy,
        config,
        patch_size=args.patch_size,
        stride=args.stride,
        feature_maps=feature_maps,
        mu_values=mu_values,
        threads=args.threads,
    )
    metrics = {
        "psnr_in": psnr(clean, noisy),
        "psnr_out": psnr(clean, denoised),
        "ssim_in": ssim(clean, noisy),
        "ssim_out": ssim(clean, denoised),
    }
    return noisy, denoised, metrics


def _cmd_denoise(args) -> int:
    try:
        config = _denoiser_config(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        clean = load_image(args.input)
        mu_values, feature_maps = _load_inputs(args)
        _, denoised, metrics = _denoise_once(args, clean, config, mu_values, feature_maps)
        save_image(denoised, args.output)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for key in ("psnr_in", "psnr_out", "ssim_in", "ssim_out"):
        print(f"{key}={metrics[key]!r}")
    return 0


def _cmd_bench(args) -> int:
    try:
        config = bench_mod.BenchConfig(
            trials=args.trials,
            orders=_parse_orders(args.orders),
            nodes=args.nodes,
            mu=args.mu,
            epsilon=args.epsilon,
            seed=args.seed,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    result = bench_mod.run_bench(config, collect_timings=args.time_output is not None)
    try:
        if args.output == "-":
            bench_mod.write_accuracy_csv(result, sys.stdout)
        else:
            bench_mod.write_accuracy_csv(result, args.output)
        if args.time_output is not None:
            bench_mod.write_timing_csv(result, args.time_output)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _cmd_sweep(args) -> int:
    try:
        grid = [float(v) for v in args.mu_grid.split(",") if v.strip()]
        if not grid or any(not v > 0 for v in grid):
            raise ValueError("mu grid must be positive scalars")
        base = _denoiser_config(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        clean = load_image(args.input)
        _, feature_maps = _load_inputs(args)
        rows = []
        for mu in grid:
            config = replace(base, filter=replace(base.filter, mu=mu))
            _, _, metrics = _denoise_once(args, clean, config, None, feature_maps)
            rows.append(
                (mu, metrics["psnr_in"], metrics["psnr_out"], metrics["ssim_in"], metrics["ssim_out"])
            )
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    def emit(fh):
        fh.write("mu,psnr_in,psnr_out,ssim_in,ssim_out\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")

    try:
        if args.output == "-":
            emit(sys.stdout)
        else:
            with open(args.output, "w") as fh:
                emit(fh)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "denoise":
        return _cmd_denoise(args)
    if args.command == "bench-approx":
        return _cmd_bench(args)
    return _cmd_sweep(args)


def entry() -> None:
    sys.exit(main())
