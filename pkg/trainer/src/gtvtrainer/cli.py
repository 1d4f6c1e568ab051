"""Command line for training and exporting.

``train`` fits both networks on a directory of clean images and writes
a checkpoint plus a loss log; ``export-features`` and ``export-mu``
turn a checkpoint and a noisy image into the two binary files the
denoiser CLI accepts. Exit codes: 0 success, 1 I/O or data failure,
2 invalid flag values.
"""

from __future__ import annotations

import argparse
import sys

from .export import export_features, export_mu
from .train import TrainConfig, train


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gtvtrainer",
        description="Train feature/strength networks through the unrolled graph filter.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit both networks on a directory of clean images")
    p_train.add_argument("--data", required=True, help="directory of clean PGM/PPM images")
    p_train.add_argument("--checkpoint", required=True, help="output checkpoint path")
    p_train.add_argument("--log", default=None, help="training-loss CSV path")
    p_train.add_argument("--epochs", type=int, default=50)
    p_train.add_argument("--batch", type=int, default=16)
    p_train.add_argument("--lr", type=float, default=1e-4)
    p_train.add_argument("--sigma", type=float, default=25.0, help="noise std on the 0-255 scale")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--patch-size", type=int, default=36)
    p_train.add_argument("--blocks", type=int, default=6)
    p_train.add_argument("--epsilon", type=float, default=0.3)
    p_train.add_argument("--rho", type=float, default=0.01)
    p_train.add_argument("--quiet", action="store_true")

    p_feat = sub.add_parser("export-features", help="write a feature-map file for an image")
    p_feat.add_argument("--checkpoint", required=True)
    p_feat.add_argument("--input", required=True, help="noisy PGM/PPM image")
    p_feat.add_argument("--output", required=True)

    p_mu = sub.add_parser("export-mu", help="write a per-patch strengths file for an image")
    p_mu.add_argument("--checkpoint", required=True)
    p_mu.add_argument("--input", required=True, help="noisy PGM/PPM image")
    p_mu.add_argument("--output", required=True)
    p_mu.add_argument("--patch-size", type=int, default=None, help="default: checkpoint's")
    p_mu.add_argument("--stride", type=int, default=None, help="default: patch size")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "train":
            try:
                config = TrainConfig(
                    epochs=args.epochs,
                    batch_size=args.batch,
                    lr=args.lr,
                    sigma=args.sigma,
                    seed=args.seed,
                    patch_size=args.patch_size,
                    blocks=args.blocks,
                    epsilon=args.epsilon,
                    rho=args.rho,
                )
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 2
            history = train(
                args.data, config, checkpoint_path=args.checkpoint,
                log_path=args.log, verbose=not args.quiet,
            )
            print(f"final_loss={history[-1]!r}")
        elif args.command == "export-features":
            shape = export_features(args.checkpoint, args.input, args.output)
            print(f"wrote {args.output} ({shape[0]}x{shape[1]}x{shape[2]})")
        else:
            count = export_mu(
                args.checkpoint, args.input, args.output,
                patch_size=args.patch_size, stride=args.stride,
            )
            print(f"wrote {args.output} ({count} strengths)")
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
