"""Differentiable replica of one denoiser layer.

Numerically mirrors the deployed pipeline: Gaussian-kernel edge weights
on the 8-neighborhood grid, B blocks that reweight the graph by the
current estimate's gaps (floored at rho) and solve the low-pass filter
(I + mu L) x = y against the layer's fixed input. The solve is a dense
batched factorization so gradients are exact; the deployment-side
Krylov and Chebyshev paths are inference accelerators only and are not
replicated here.

The absolute value and the rho floor are kept with their standard
subgradient semantics at the kinks; random inputs sit at a kink with
probability zero.
"""

from __future__ import annotations

import torch

__all__ = ["grid_edges", "edge_weights", "dense_laplacian", "unrolled_layer"]


def grid_edges(height: int, width: int) -> tuple:
    """Index pairs (i < j) of the 8-neighborhood grid graph, row-major.

    Returns two int64 tensors of equal length: horizontal, vertical and
    both diagonal neighbor pairs, each undirected pair stored once.
    """
    if height < 1 or width < 1:
        raise ValueError("grid dimensions must be >= 1")
    idx = torch.arange(height * width, dtype=torch.int64).reshape(height, width)
    pairs = [
        (idx[:, :-1], idx[:, 1:]),
        (idx[:-1, :], idx[1:, :]),
        (idx[:-1, :-1], idx[1:, 1:]),
        (idx[:-1, 1:], idx[1:, :-1]),
    ]
    i = torch.cat([a.reshape(-1) for a, _ in pairs])
    j = torch.cat([b.reshape(-1) for _, b in pairs])
    lo = torch.minimum(i, j)
    hi = torch.maximum(i, j)
    return lo, hi


def edge_weights(
    features: torch.Tensor, edge_i: torch.Tensor, edge_j: torch.Tensor, epsilon: float
) -> torch.Tensor:
    """Gaussian-kernel weights exp(-||f_i - f_j||^2 / epsilon^2).

    ``features`` is (batch, pixels, k); returns (batch, edges).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    diff = features[:, edge_i, :] - features[:, edge_j, :]
    dist2 = (diff * diff).sum(-1)
    return torch.exp(-dist2 / (epsilon * epsilon))


def dense_laplacian(
    weights: torch.Tensor, edge_i: torch.Tensor, edge_j: torch.Tensor, n: int
) -> torch.Tensor:
    """Assemble (batch, n, n) combinatorial Laplacians from edge weights."""
    batch = weights.shape[0]
    flat = torch.zeros(batch, n * n, dtype=weights.dtype, device=weights.device)
    flat = flat.index_add(1, edge_i * n + edge_j, weights)
    flat = flat.index_add(1, edge_j * n + edge_i, weights)
    adjacency = flat.reshape(batch, n, n)
    return torch.diag_embed(adjacency.sum(-1)) - adjacency


def unrolled_layer(
    y: torch.Tensor,
    features: torch.Tensor,
    mu: torch.Tensor,
    height: int,
    width: int,
    epsilon: float = 0.3,
    rho: float = 0.01,
    blocks: int = 6,
) -> torch.Tensor:
    """Run one layer of B reweighted filtering blocks.

    y: (batch, pixels) noisy signals, pixels row-major over the grid.
    features: (batch, pixels, k) per-pixel feature vectors.
    mu: per-sample filter strengths, shape (batch,) or a scalar tensor.
    Returns (batch, pixels).
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    if blocks < 1:
        raise ValueError("blocks must be >= 1")
    n = height * width
    if y.dim() != 2 or y.shape[1] != n:
        raise ValueError(f"y must be (batch, {n}), got {tuple(y.shape)}")
    if features.dim() != 3 or features.shape[:2] != y.shape[:1] + (n,):
        raise ValueError(f"features must be (batch, {n}, k), got {tuple(features.shape)}")
    mu = torch.as_tensor(mu, dtype=y.dtype, device=y.device)
    if mu.dim() == 0:
        mu = mu.expand(y.shape[0])
    if not bool((mu > 0).all()):
        raise ValueError("mu must be positive")

    edge_i, edge_j = grid_edges(height, width)
    edge_i = edge_i.to(y.device)
    edge_j = edge_j.to(y.device)
    w = edge_weights(features, edge_i, edge_j, epsilon)
    eye = torch.eye(n, dtype=y.dtype, device=y.device)

    x = y
    for _ in range(blocks):
        gaps = (x[:, edge_i] - x[:, edge_j]).abs().clamp_min(rho)
        lap = dense_laplacian(w / gaps, edge_i, edge_j, n)
        system = eye + mu.reshape(-1, 1, 1) * lap
        x = torch.linalg.solve(system, y.unsqueeze(-1)).squeeze(-1)
    return x
