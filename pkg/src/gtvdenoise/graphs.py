"""Patch graphs for edge-aware denoising.

A pixel patch is modelled as an undirected 8-neighborhood grid graph.
Edge weights come from per-pixel feature vectors through a Gaussian
kernel; a reweighting step turns the total-variation prior into a
quadratic form via a modified adjacency and its Laplacian.

Edges are stored once per undirected pair with ``i < j``; degree and
Laplacian assembly account for both directions implicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "FeatureMap",
    "PatchGraph",
    "build_topology",
    "compute_edge_weights",
    "handcrafted_features",
    "reweight_gamma",
    "l1_laplacian",
    "glr_value",
    "gtv_value",
]


@dataclass(frozen=True)
class FeatureMap:
    """Per-pixel feature vectors for a height x width patch.

    ``values`` has shape (height*width, k) in float32, pixels in
    row-major order. All values must be finite and k >= 1.
    """

    height: int
    width: int
    values: np.ndarray

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError("feature map dimensions must be positive")
        values = np.ascontiguousarray(self.values, dtype=np.float32)
        if values.ndim != 2 or values.shape[0] != self.height * self.width:
            raise ValueError(
                f"expected ({self.height * self.width}, k) feature array, "
                f"got shape {values.shape}"
            )
        if values.shape[1] < 1:
            raise ValueError("feature dimension k must be >= 1")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def k(self) -> int:
        return self.values.shape[1]

    @property
    def n(self) -> int:
        return self.height * self.width

    def crop(self, row: int, col: int, height: int, width: int) -> "FeatureMap":
        """Extract the feature sub-map of a patch anchored at (row, col)."""
        if row < 0 or col < 0 or row + height > self.height or col + width > self.width:
            raise ValueError("crop window exceeds feature map bounds")
        grid = self.values.reshape(self.height, self.width, self.k)
        sub = grid[row : row + height, col : col + width, :].reshape(-1, self.k)
        return FeatureMap(height, width, sub.copy())


@dataclass(frozen=True)
class PatchGraph:
    """Undirected weighted graph over the pixels of a patch.

    Edges are index pairs with ``edge_i < edge_j``. ``weights`` is None
    for a bare topology and a float64 array of per-edge weights once
    computed (Gaussian-kernel weights or reweighted gamma values).
    """

    n: int
    edge_i: np.ndarray
    edge_j: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        ei = np.ascontiguousarray(self.edge_i, dtype=np.int32)
        ej = np.ascontiguousarray(self.edge_j, dtype=np.int32)
        if ei.shape != ej.shape or ei.ndim != 1:
            raise ValueError("edge index arrays must be 1-D and equally sized")
        if ei.size and not np.all(ei < ej):
            raise ValueError("edges must be stored with i < j")
        object.__setattr__(self, "edge_i", ei)
        object.__setattr__(self, "edge_j", ej)
        if self.weights is not None:
            w = np.ascontiguousarray(self.weights, dtype=np.float64)
            if w.shape != ei.shape:
                raise ValueError("one weight per edge required")
            object.__setattr__(self, "weights", w)

    @property
    def num_edges(self) -> int:
        return self.edge_i.size

    def with_weights(self, weights: np.ndarray) -> "PatchGraph":
        return PatchGraph(self.n, self.edge_i, self.edge_j, weights)


def build_topology(height: int, width: int) -> PatchGraph:
    """Build the 8-neighborhood grid topology for a height x width patch.

    Horizontal, vertical and both diagonal neighbor pairs are included;
    border pixels simply have fewer neighbors. Weights are left unset.
    """
    if height < 1 or width < 1:
        raise ValueError("patch dimensions must be >= 1")
    idx = np.arange(height * width, dtype=np.int64).reshape(height, width)
    pairs = [
        (idx[:, :-1], idx[:, 1:]),      # horizontal
        (idx[:-1, :], idx[1:, :]),      # vertical
        (idx[:-1, :-1], idx[1:, 1:]),   # diagonal down-right
        (idx[:-1, 1:], idx[1:, :-1]),   # diagonal down-left
    ]
    i = np.concatenate([a.ravel() for a, _ in pairs])
    j = np.concatenate([b.ravel() for _, b in pairs])
    lo = np.minimum(i, j)
    hi = np.maximum(i, j)
    order = np.lexsort((hi, lo))
    return PatchGraph(height * width, lo[order], hi[order], None)


def compute_edge_weights(
    topology: PatchGraph, features: FeatureMap, epsilon: float
) -> PatchGraph:
    """Attach Gaussian-kernel edge weights derived from feature distances.

    For each edge (i, j) the weight is exp(-||f_i - f_j||^2 / epsilon^2),
    which lies in (0, 1].
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if features.n != topology.n:
        raise ValueError(
            f"feature map covers {features.n} pixels, graph has {topology.n} nodes"
        )
    f = features.values.astype(np.float64)
    diff = f[topology.edge_i] - f[topology.edge_j]
    dist2 = np.einsum("ek,ek->e", diff, diff)
    weights = np.exp(-dist2 / (epsilon * epsilon))
    return topology.with_weights(weights)


def handcrafted_features(
    patch: np.ndarray,
    location_scale: float = 0.1,
    intensity_scale: float = 1.0,
) -> FeatureMap:
    """Training-free per-pixel features: scaled row, column and intensity.

    ``patch`` is a 2-D array of intensities in [0, 1]. Feature k=3 per
    pixel: (row/height * location_scale, col/width * location_scale,
    intensity * intensity_scale).
    """
    patch = np.asarray(patch, dtype=np.float64)
    if patch.ndim != 2:
        raise ValueError("patch must be a 2-D intensity array")
    height, width = patch.shape
    rows, cols = np.meshgrid(
        np.arange(height, dtype=np.float64),
        np.arange(width, dtype=np.float64),
        indexing="ij",
    )
    feats = np.stack(
        [
            rows / height * location_scale,
            cols / width * location_scale,
            patch * intensity_scale,
        ],
        axis=-1,
    )
    return FeatureMap(height, width, feats.reshape(-1, 3).astype(np.float32))


def reweight_gamma(graph: PatchGraph, estimate: np.ndarray, rho: float) -> PatchGraph:
    """Reweight edges by the current estimate's gaps, flooring at rho.

    Each weight becomes w_ij / max(|x_i - x_j|, rho), the quadratic
    surrogate weighting of the total-variation prior. rho > 0 guards the
    division when neighboring estimates coincide.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    if graph.weights is None:
        raise ValueError("graph has no edge weights to reweight")
    x = np.asarray(estimate, dtype=np.float64).ravel()
    if x.size != graph.n:
        raise ValueError(f"estimate length {x.size} != node count {graph.n}")
    gaps = np.abs(x[graph.edge_i] - x[graph.edge_j])
    gamma = graph.weights / np.maximum(gaps, rho)
    return graph.with_weights(gamma)


def l1_laplacian(gamma_graph: PatchGraph) -> sp.csr_array:
    """Assemble the Laplacian diag(G 1) - G of a (re)weighted graph.

    Returns a sparse CSR matrix. Symmetric with zero row sums and
    nonpositive off-diagonals by construction; positive semi-definite
    for nonnegative weights.
    """
    if gamma_graph.weights is None:
        raise ValueError("graph has no edge weights")
    w = gamma_graph.weights
    if w.size and w.min() < 0:
        raise ValueError("edge weights must be nonnegative")
    n = gamma_graph.n
    ei = gamma_graph.edge_i
    ej = gamma_graph.edge_j
    deg = np.zeros(n)
    np.add.at(deg, ei, w)
    np.add.at(deg, ej, w)
    rows = np.concatenate([ei, ej, np.arange(n, dtype=np.int32)])
    cols = np.concatenate([ej, ei, np.arange(n, dtype=np.int32)])
    vals = np.concatenate([-w, -w, deg])
    return sp.coo_array((vals, (rows, cols)), shape=(n, n)).tocsr()


def glr_value(laplacian: sp.sparray | np.ndarray, x: np.ndarray) -> float:
    """Quadratic smoothness prior x^T L x (sum of w_ij (x_j - x_i)^2)."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if laplacian.shape != (x.size, x.size):
        raise ValueError(
            f"laplacian shape {laplacian.shape} incompatible with signal length {x.size}"
        )
    return float(x @ (laplacian @ x))


def gtv_value(graph: PatchGraph, x: np.ndarray) -> float:
    """Total-variation prior sum_ij w_ij |x_j - x_i| over the edge set."""
    if graph.weights is None:
        raise ValueError("graph has no edge weights")
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != graph.n:
        raise ValueError(f"signal length {x.size} != node count {graph.n}")
    return float(np.sum(graph.weights * np.abs(x[graph.edge_j] - x[graph.edge_i])))
