"""Compare Krylov and Chebyshev filter accuracy against the exact solve.

Runs the approximation benchmark at its defaults (1000 random trials on
1296-node patch graphs) and prints a small table of mean MSE per order
alongside writing the full CSV. A quick reduced run for smoke testing:

    python scripts/approx_comparison.py --trials 20 --nodes 64 --orders 1 2 4 8
"""

import argparse
import sys
from pathlib import Path

from gtvdenoise import BenchConfig, run_bench
from gtvdenoise.bench import write_accuracy_csv


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--nodes", type=int, default=1296)
    parser.add_argument("--mu", type=float, default=0.5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--orders", type=int, nargs="+",
                        default=list(range(1, 21)))
    parser.add_argument("--output", type=Path, default=Path("approx_comparison.csv"))
    args = parser.parse_args(argv)

    config = BenchConfig(trials=args.trials, orders=tuple(args.orders),
                         nodes=args.nodes, mu=args.mu, seed=args.seed)
    result = run_bench(config)
    write_accuracy_csv(result, args.output)
    print(f"wrote {args.output}")

    print(f"{'order':>5}  {'krylov mse':>12}  {'chebyshev mse':>13}")
    for order in config.orders:
        lanczos = result.mean_mse("lanczos", order)
        cheby = result.mean_mse("chebyshev", order)
        marker = "" if lanczos <= cheby else "  <- chebyshev ahead"
        print(f"{order:>5}  {lanczos:>12.4e}  {cheby:>13.4e}{marker}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
