"""Approximation benchmark: Krylov vs Chebyshev accuracy per order.

Each trial draws a uniform-random patch, builds its handcrafted-feature
grid graph, and filters a standard-normal signal exactly (sparse direct
solve) and with both approximations at every requested order. Reported
errors are means over trials; the accuracy rows depend only on the seed
and are therefore byte-reproducible. Wall-clock figures live in a
separate optional table because they never are.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .filters import (
    DENSE_EIGEN_CAP,
    chebyshev_basis,
    chebyshev_coefficients,
    chebyshev_combine,
    filter_chebyshev,
    filter_lanczos,
    gershgorin_upper_bound,
    lanczos_apply,
    lanczos_factorize,
)
from .graphs import build_topology, compute_edge_weights, handcrafted_features, l1_laplacian

__all__ = [
    "BenchConfig",
    "BenchResult",
    "grid_shape",
    "run_bench",
    "write_accuracy_csv",
    "write_timing_csv",
]

ACCURACY_COLUMNS = ("method", "order", "mean_mse", "mean_rel_mse")
TIMING_COLUMNS = ("method", "order", "seconds_per_apply")

# repetitions per configuration when timing; median reduces jitter
_TIMING_REPS = 5


@dataclass(frozen=True)
class BenchConfig:
    trials: int = 1000
    orders: tuple = tuple(range(1, 21))
    nodes: int = 1296
    mu: float = 0.5
    epsilon: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        orders = tuple(int(m) for m in self.orders)
        if not orders:
            raise ValueError("orders must be nonempty")
        if min(orders) < 1:
            raise ValueError("orders must be >= 1")
        object.__setattr__(self, "orders", orders)
        if self.nodes < 2:
            raise ValueError("need at least 2 nodes")
        if self.nodes > DENSE_EIGEN_CAP:
            raise ValueError(f"node count {self.nodes} exceeds cap {DENSE_EIGEN_CAP}")
        if max(orders) > self.nodes:
            raise ValueError("largest order exceeds node count")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class BenchResult:
    """Accuracy rows (method, order, mean_mse, mean_rel_mse) plus timings."""

    config: BenchConfig
    accuracy: tuple
    timings: tuple = field(default=())

    def mean_mse(self, method: str, order: int) -> float:
        for row in self.accuracy:
            if row[0] == method and row[1] == order:
                return row[2]
        raise KeyError(f"no row for ({method}, {order})")

    def mean_rel_mse(self, method: str, order: int) -> float:
        for row in self.accuracy:
            if row[0] == method and row[1] == order:
                return row[3]
        raise KeyError(f"no row for ({method}, {order})")


def grid_shape(nodes: int) -> tuple:
    """Most-square (height, width) factorization of a node count."""
    best = 1
    for h in range(1, int(math.isqrt(nodes)) + 1):
        if nodes % h == 0:
            best = h
    return best, nodes // best


def _trial_instance(rng: np.random.Generator, height: int, width: int, epsilon: float):
    patch = rng.random((height, width))
    feats = handcrafted_features(patch)
    wgraph = compute_edge_weights(build_topology(height, width), feats, epsilon)
    lap = l1_laplacian(wgraph)
    y = rng.standard_normal(height * width)
    return lap, y


def run_bench(config: BenchConfig, collect_timings: bool = False) -> BenchResult:
    """Run the accuracy comparison; optionally time one representative apply."""
    height, width = grid_shape(config.nodes)
    n = config.nodes
    orders = config.orders
    max_order = max(orders)
    rng = np.random.default_rng(config.seed)
    identity = sp.eye_array(n, format="csc")

    sq_err = {("lanczos", m): 0.0 for m in orders}
    sq_err.update({("chebyshev", m): 0.0 for m in orders})
    rel_err = dict(sq_err)

    lap = y = None
    for _ in range(config.trials):
        lap, y = _trial_instance(rng, height, width, config.epsilon)
        exact = splu((identity + config.mu * lap).tocsc()).solve(y)
        energy = float(exact @ exact)

        factor = lanczos_factorize(lap, y, min(max_order, n))
        lam_ub = gershgorin_upper_bound(lap)
        basis = chebyshev_basis(lap, y, max_order, lam_ub)
        for m in orders:
            approx = lanczos_apply(factor.truncate(min(m, factor.order)), config.mu)
            err = float(np.sum((approx - exact) ** 2))
            sq_err[("lanczos", m)] += err / n
            rel_err[("lanczos", m)] += err / energy

            coeffs = chebyshev_coefficients(config.mu, lam_ub, m)
            approx = chebyshev_combine(coeffs, basis[:m])
            err = float(np.sum((approx - exact) ** 2))
            sq_err[("chebyshev", m)] += err / n
            rel_err[("chebyshev", m)] += err / energy

    accuracy = tuple(
        (method, m, sq_err[(method, m)] / config.trials, rel_err[(method, m)] / config.trials)
        for method in ("lanczos", "chebyshev")
        for m in orders
    )

    timings = ()
    if collect_timings:
        timings = _collect_timings(lap, y, config)
    return BenchResult(config=config, accuracy=accuracy, timings=timings)


def _median_seconds(fn) -> float:
    samples = []
    for _ in range(_TIMING_REPS):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    samples.sort()
    return samples[len(samples) // 2]


def _collect_timings(lap, y, config: BenchConfig) -> tuple:
    """Median wall-clock of one full apply per configuration, on the last
    trial's instance. Order 0 denotes the exact reference solve."""
    n = lap.shape[0]
    identity = sp.eye_array(n, format="csc")
    rows = [
        (
            "exact",
            0,
            _median_seconds(lambda: splu((identity + config.mu * lap).tocsc()).solve(y)),
        )
    ]
    for m in config.orders:
        rows.append(
            ("lanczos", m, _median_seconds(lambda: filter_lanczos(lap, y, config.mu, min(m, n))))
        )
        rows.append(
            ("chebyshev", m, _median_seconds(lambda: filter_chebyshev(lap, y, config.mu, m)))
        )
    return tuple(rows)


def _write_rows(fh, columns, rows) -> None:
    fh.write(",".join(columns) + "\n")
    for row in rows:
        fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def write_accuracy_csv(result: BenchResult, dest) -> None:
    """Write accuracy rows to a path or file-like destination."""
    if hasattr(dest, "write"):
        _write_rows(dest, ACCURACY_COLUMNS, result.accuracy)
    else:
        with open(dest, "w") as fh:
            _write_rows(fh, ACCURACY_COLUMNS, result.accuracy)


def write_timing_csv(result: BenchResult, dest) -> None:
    if hasattr(dest, "write"):
        _write_rows(dest, TIMING_COLUMNS, result.timings)
    else:
        with open(dest, "w") as fh:
            _write_rows(fh, TIMING_COLUMNS, result.timings)
