"""Training data: grayscale images, patch tiling, fixed noise pairs.

Images are binary PGM/PPM files with maxval 255 (color is collapsed to
luminance). Each clean image is tiled into square patches; the noisy
counterpart of every patch is drawn once with a seeded generator, so an
epoch's loss depends only on the parameters and the batch order.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

__all__ = ["LUMA_WEIGHTS", "read_gray_image", "patch_origins", "tile_patches", "load_patch_set", "make_noisy"]

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])
IMAGE_SUFFIXES = (".pgm", ".ppm")


def read_gray_image(path) -> np.ndarray:
    """Read a binary PGM (P5) or PPM (P6) file as (h, w) float64 in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    fields = []
    pos = 0
    while len(fields) < 4 and pos < len(data):
        # header tokens are whitespace-separated; '#' starts a comment line
        if data[pos : pos + 1].isspace():
            pos += 1
        elif data[pos : pos + 1] == b"#":
            pos = data.find(b"\n", pos)
            if pos < 0:
                raise ValueError(f"{path}: unterminated comment")
        else:
            end = pos
            while end < len(data) and not data[end : end + 1].isspace():
                end += 1
            fields.append(data[pos:end])
            pos = end
    if len(fields) < 4:
        raise ValueError(f"{path}: truncated header")
    magic = fields[0]
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"{path}: unsupported magic {magic!r}")
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError:
        raise ValueError(f"{path}: non-numeric header field") from None
    if width < 1 or height < 1:
        raise ValueError(f"{path}: bad dimensions {width}x{height}")
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 is supported, got {maxval}")
    channels = 1 if magic == b"P5" else 3
    count = height * width * channels
    if len(data) - (pos + 1) < count:
        raise ValueError(f"{path}: raster truncated")
    raster = np.frombuffer(data, dtype=np.uint8, count=count, offset=pos + 1)
    img = raster.reshape(height, width, channels).astype(np.float64) / 255.0
    if channels == 3:
        return np.clip(img @ LUMA_WEIGHTS, 0.0, 1.0)
    return img[:, :, 0]


def patch_origins(extent: int, size: int, stride: int) -> list:
    """Tiling origins along one axis, trailing origin clamped to the border.

    Matches the denoiser's tiling so per-patch strength files line up
    patch for patch.
    """
    starts = list(range(0, extent - size + 1, stride))
    if starts[-1] != extent - size:
        starts.append(extent - size)
    return starts


def tile_patches(image: np.ndarray, size: int, stride: int | None = None) -> np.ndarray:
    """Cut an (h, w) image into (count, size, size) patches, row-major."""
    if stride is None:
        stride = size
    if size < 1 or stride < 1:
        raise ValueError("size and stride must be >= 1")
    height, width = image.shape
    if size > min(height, width):
        raise ValueError(f"patch size {size} exceeds image extent {height}x{width}")
    rows = patch_origins(height, size, stride)
    cols = patch_origins(width, size, stride)
    return np.stack([image[r : r + size, c : c + size] for r in rows for c in cols])


def load_patch_set(dataset_dir, patch_size: int) -> torch.Tensor:
    """Tile every PGM/PPM under a directory into one (N, size, size) tensor."""
    root = Path(dataset_dir)
    paths = sorted(p for p in root.rglob("*") if p.suffix.lower() in IMAGE_SUFFIXES)
    if not paths:
        raise ValueError(f"no .pgm/.ppm images under {root}")
    stacks = [tile_patches(read_gray_image(p), patch_size) for p in paths]
    return torch.from_numpy(np.concatenate(stacks)).to(torch.float64)


def make_noisy(clean: torch.Tensor, sigma: float, seed: int) -> torch.Tensor:
    """Add white Gaussian noise (std sigma on the 0..255 scale), seeded."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return clean.clone()
    generator = torch.Generator().manual_seed(seed)
    noise = torch.randn(clean.shape, generator=generator, dtype=clean.dtype)
    return clean + noise * (sigma / 255.0)
