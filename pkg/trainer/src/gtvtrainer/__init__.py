"""Offline trainer for the graph-filter denoiser's learned inputs.

Trains a per-pixel feature network and a per-patch filter-strength
network end to end through a differentiable replica of the denoiser's
reweighted graph-filtering layer, then exports their outputs in the
binary container formats the denoiser command line consumes.
"""

from .data import load_patch_set, make_noisy, read_gray_image, tile_patches
from .export import export_features, export_mu
from .formats import (
    read_feature_file,
    read_mu_file,
    write_feature_file,
    write_mu_file,
)
from .layer import dense_laplacian, edge_weights, grid_edges, unrolled_layer
from .models import FeatureNet, StrengthNet, to_input
from .train import TrainConfig, load_checkpoint, save_checkpoint, train, train_on_patches

__version__ = "0.1.0"
