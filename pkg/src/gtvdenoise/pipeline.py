"""The unrolled denoiser: layers of reweighted graph filtering.

One layer builds a single feature-weighted graph for its input patch and
then runs B blocks. Each block rebuilds the reweighted Laplacian from the
previous block's estimate and solves the low-pass filtering problem
against the layer's (fixed) input signal. Layers cascade: the output of
layer t is the input of layer t+1.

Feature vectors and the filter strength mu are pluggable per layer, so a
learned provider can replace the handcrafted defaults file-by-file.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import graphs
from .filters import FilterSpec, apply_filter
from .graphs import FeatureMap, PatchGraph, handcrafted_features, l1_laplacian, reweight_gamma
from .images import LUMA_WEIGHTS, ImageBuffer, assemble_patches, extract_patches

__all__ = [
    "DenoiserConfig",
    "LayerInputs",
    "run_block",
    "run_layer",
    "run_denoiser",
    "gtv_objective",
    "denoise_image",
]


@dataclass(frozen=True)
class DenoiserConfig:
    """Hyperparameters of the unrolled denoiser.

    ``filter.mu`` doubles as the fixed filter strength used when no
    per-layer value is supplied.
    """

    layers: int = 1
    blocks_per_layer: int = 6
    epsilon: float = 0.3
    rho: float = 0.01
    filter: FilterSpec = field(default_factory=lambda: FilterSpec(mu=0.5))
    location_scale: float = 0.1
    intensity_scale: float = 1.0

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.blocks_per_layer < 1:
            raise ValueError("blocks_per_layer must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.rho <= 0:
            raise ValueError("rho must be positive")


@dataclass(frozen=True)
class LayerInputs:
    """Per-layer data: one feature map and one filter strength."""

    features: FeatureMap
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")


def run_block(
    graph: PatchGraph,
    estimate: np.ndarray,
    y: np.ndarray,
    mu: float,
    rho: float,
    filter_spec: FilterSpec,
) -> np.ndarray:
    """One solver block: reweight the graph at ``estimate``, filter ``y``.

    The fidelity anchor is always the layer input y; only the Laplacian
    changes from block to block through the reweighting.
    """
    if graph.weights is None:
        raise ValueError("graph weights must be computed before filtering")
    y = np.asarray(y, dtype=np.float64).ravel()
    estimate = np.asarray(estimate, dtype=np.float64).ravel()
    if y.size != graph.n or estimate.size != graph.n:
        raise ValueError("estimate and y must match the graph's node count")
    if not np.any(y):
        # an all-zero patch is a fixed point of the filter for any graph
        return np.zeros_like(y)
    lap = l1_laplacian(reweight_gamma(graph, estimate, rho))
    return apply_filter(lap, y, replace(filter_spec, mu=mu))


def run_layer(y: np.ndarray, inputs: LayerInputs, config: DenoiserConfig) -> np.ndarray:
    """One layer: build the graph once, chain B blocks from estimate y.

    ``y`` is (h, w) or (h, w, c); channels share the feature graph but
    carry independent reweighting chains. Returns an array of y's shape.
    """
    arr = np.asarray(y, dtype=np.float64)
    flat_input = arr.ndim == 2
    if flat_input:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ValueError("layer input must be (h, w) or (h, w, c)")
    h, w, nchan = arr.shape
    if (inputs.features.height, inputs.features.width) != (h, w):
        raise ValueError(
            f"feature map is {inputs.features.height}x{inputs.features.width}, "
            f"patch is {h}x{w}"
        )
    topology = graphs.build_topology(h, w)
    wgraph = graphs.compute_edge_weights(topology, inputs.features, config.epsilon)
    out = np.empty_like(arr)
    for ch in range(nchan):
        signal = arr[:, :, ch].ravel()
        estimate = signal
        for _ in range(config.blocks_per_layer):
            estimate = run_block(
                wgraph, estimate, signal, inputs.mu, config.rho, config.filter
            )
        out[:, :, ch] = estimate.reshape(h, w)
    return out[:, :, 0] if flat_input else out


def run_denoiser(y: np.ndarray, config: DenoiserConfig, layer_inputs) -> np.ndarray:
    """Cascade the configured layers over a patch (or whole image)."""
    layer_inputs = list(layer_inputs)
    if len(layer_inputs) != config.layers:
        raise ValueError(
            f"got {len(layer_inputs)} layer inputs for {config.layers} layers"
        )
    x = np.asarray(y, dtype=np.float64)
    for inputs in layer_inputs:
        x = run_layer(x, inputs, config)
    return x


def gtv_objective(wgraph: PatchGraph, y: np.ndarray, x: np.ndarray, mu: float) -> float:
    """Fidelity-plus-prior objective ||y - x||^2 + mu * sum w_ij |x_i - x_j|."""
    y = np.asarray(y, dtype=np.float64).ravel()
    x = np.asarray(x, dtype=np.float64).ravel()
    fidelity = float(np.sum((y - x) ** 2))
    return fidelity + mu * graphs.gtv_value(wgraph, x)


def _intensity_plane(patch: np.ndarray) -> np.ndarray:
    """Grayscale intensity of an (h, w, c) patch for feature extraction."""
    if patch.shape[2] == 1:
        return patch[:, :, 0]
    return np.clip(patch @ LUMA_WEIGHTS, 0.0, 1.0)


def denoise_image(
    noisy: ImageBuffer,
    config: DenoiserConfig,
    patch_size: int = 36,
    stride: int = 36,
    feature_maps=None,
    mu_values=None,
    threads: int = 1,
) -> ImageBuffer:
    """Denoise a full image patch by patch and reassemble.

    feature_maps: None for handcrafted features (recomputed per patch
    from the noisy intensities, the same provider every layer), or a list
    of whole-image FeatureMap objects, one per layer, cropped per patch.

    mu_values: None to use config.filter.mu everywhere, a scalar to
    override it, or an array of shape (num_patches, layers) for learned
    per-patch strengths.

    threads: worker threads over patches. Results are assembled in patch
    order, so the thread count cannot change the output.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    grid = extract_patches(noisy, patch_size, stride)
    num = grid.num_patches

    if feature_maps is not None:
        feature_maps = list(feature_maps)
        if len(feature_maps) != config.layers:
            raise ValueError(
                f"got {len(feature_maps)} feature maps for {config.layers} layers"
            )
        for fm in feature_maps:
            if (fm.height, fm.width) != (noisy.height, noisy.width):
                raise ValueError("feature map dimensions must match the image")

    if mu_values is None:
        mu_grid = np.full((num, config.layers), config.filter.mu)
    else:
        arr = np.asarray(mu_values, dtype=np.float64)
        if arr.ndim == 0 or arr.size == 1:
            mu_grid = np.full((num, config.layers), float(arr.reshape(-1)[0]))
        else:
            expected = num * config.layers
            if arr.size != expected:
                raise ValueError(
                    f"mu values: got {arr.size}, need {expected} "
                    f"({num} patches x {config.layers} layers) or 1"
                )
            mu_grid = arr.reshape(num, config.layers)
    if not np.all(mu_grid > 0):
        raise ValueError("all mu values must be positive")

    def process(index: int) -> np.ndarray:
        patch = grid.patches[index]
        if feature_maps is not None:
            r, c = grid.origins[index]
            per_layer = [fm.crop(r, c, patch_size, patch_size) for fm in feature_maps]
        else:
            # handcrafted features have no layer-specific information:
            # one map from the noisy patch serves every layer
            shared = handcrafted_features(
                _intensity_plane(patch), config.location_scale, config.intensity_scale
            )
            per_layer = [shared] * config.layers
        layer_inputs = [
            LayerInputs(per_layer[t], mu_grid[index, t]) for t in range(config.layers)
        ]
        return run_denoiser(patch, config, layer_inputs)

    if threads == 1:
        outputs = [process(i) for i in range(num)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outputs = list(pool.map(process, range(num)))
    return assemble_patches(grid, [np.clip(p, 0.0, 1.0) for p in outputs])
