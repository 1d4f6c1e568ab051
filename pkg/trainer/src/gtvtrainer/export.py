"""Export trained networks' outputs in the denoiser's file formats.

The feature network runs over the whole noisy image and its per-pixel
output becomes one feature-map file; the strength network runs on each
patch of the denoiser's tiling (trailing origins clamped to the
border) and the per-patch strengths become one strengths file in
patch-major order. The checkpoint's training geometry supplies the
default patch size.
"""

from __future__ import annotations

import numpy as np
import torch

from .data import patch_origins, read_gray_image
from .formats import write_feature_file, write_mu_file
from .models import to_input
from .train import load_checkpoint

__all__ = ["export_features", "export_mu"]

# keep strengths positive after the float32 cast in the container
MU_FLOOR = 1e-12


def export_features(checkpoint_path, image_path, out_path):
    """Write the feature map of a noisy image; returns its (h, w, k) shape."""
    feature_net, _, _ = load_checkpoint(checkpoint_path)
    image = read_gray_image(image_path)
    height, width = image.shape
    with torch.no_grad():
        inputs = to_input(torch.from_numpy(image))
        grid = feature_net(inputs)[0].permute(1, 2, 0).numpy()
    write_feature_file(out_path, grid)
    return (height, width, grid.shape[2])


def export_mu(checkpoint_path, image_path, out_path, patch_size=None, stride=None):
    """Write one strength per patch of the image's tiling; returns the count."""
    _, strength_net, config = load_checkpoint(checkpoint_path)
    if patch_size is None:
        patch_size = config.patch_size
    if stride is None:
        stride = patch_size
    if patch_size < 8:
        raise ValueError("patch_size must be >= 8 (strength net pooling)")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    image = read_gray_image(image_path)
    height, width = image.shape
    if patch_size > min(height, width):
        raise ValueError(f"patch size {patch_size} exceeds image extent {height}x{width}")
    patches = np.stack(
        [
            image[r : r + patch_size, c : c + patch_size]
            for r in patch_origins(height, patch_size, stride)
            for c in patch_origins(width, patch_size, stride)
        ]
    )
    with torch.no_grad():
        strengths = strength_net(to_input(torch.from_numpy(patches)))
    values = strengths.clamp_min(MU_FLOOR).numpy()
    write_mu_file(out_path, values)
    return values.size
