"""Image buffers, patch tiling, noise synthesis, metrics, and PGM/PPM I/O.

Intensities live in [0, 1] as 64-bit floats throughout; files are 8-bit
binary netpbm rasters (P5 grayscale, P6 color) with maxval 255.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

__all__ = [
    "LUMA_WEIGHTS",
    "ImageBuffer",
    "PatchGrid",
    "luminance",
    "extract_patches",
    "assemble_patches",
    "add_awgn",
    "psnr",
    "ssim",
    "load_image",
    "save_image",
]

# BT.601 luma weights for RGB -> grayscale reduction.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class ImageBuffer:
    """Immutable (height, width, channels) float64 raster with samples in [0, 1]."""

    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValueError(f"expected (h, w) or (h, w, 1|3) samples, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image dimensions must be positive")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("samples must lie in [0, 1]")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def channels(self) -> int:
        return self.samples.shape[2]

    @property
    def plane(self) -> np.ndarray:
        """2-D view of a single-channel image."""
        if self.channels != 1:
            raise ValueError("plane is only defined for single-channel images")
        return self.samples[:, :, 0]


def luminance(img: ImageBuffer) -> ImageBuffer:
    """BT.601 weighted reduction to grayscale; identity on grayscale input."""
    if img.channels == 1:
        return img
    return ImageBuffer(np.clip(img.samples @ LUMA_WEIGHTS, 0.0, 1.0))


def _axis_origins(extent: int, size: int, stride: int) -> list:
    starts = list(range(0, extent - size + 1, stride))
    # anchor the trailing patch on the border so coverage is complete
    if starts[-1] != extent - size:
        starts.append(extent - size)
    return starts


@dataclass(frozen=True)
class PatchGrid:
    """Row-major tiling of an image into square patches with clamped last origins."""

    image_height: int
    image_width: int
    channels: int
    patch_size: int
    stride: int
    origins: tuple = field(repr=False)
    patches: tuple = field(repr=False)

    @property
    def num_patches(self) -> int:
        return len(self.origins)


def extract_patches(img: ImageBuffer, size: int, stride: int) -> PatchGrid:
    """Tile ``img`` into size x size patches at the given stride.

    Patches are enumerated row-major by origin; the last origin along each
    axis is clamped to the border, so edge patches may overlap their
    neighbors even at stride = size.
    """
    if size < 1 or stride < 1:
        raise ValueError("size and stride must be >= 1")
    if size > min(img.height, img.width):
        raise ValueError(f"patch size {size} exceeds image extent {img.height}x{img.width}")
    rows = _axis_origins(img.height, size, stride)
    cols = _axis_origins(img.width, size, stride)
    origins = []
    patches = []
    for r in rows:
        for c in cols:
            origins.append((r, c))
            patches.append(img.samples[r : r + size, c : c + size, :])
    return PatchGrid(
        image_height=img.height,
        image_width=img.width,
        channels=img.channels,
        patch_size=size,
        stride=stride,
        origins=tuple(origins),
        patches=tuple(patches),
    )


def assemble_patches(grid: PatchGrid, patches) -> ImageBuffer:
    """Reassemble processed patches onto the grid, averaging overlaps uniformly."""
    patches = list(patches)
    if len(patches) != grid.num_patches:
        raise ValueError(f"expected {grid.num_patches} patches, got {len(patches)}")
    size = grid.patch_size
    acc = np.zeros((grid.image_height, grid.image_width, grid.channels))
    hits = np.zeros((grid.image_height, grid.image_width, 1))
    for (r, c), patch in zip(grid.origins, patches):
        block = np.asarray(patch, dtype=np.float64)
        if block.ndim == 2:
            block = block[:, :, None]
        if block.shape != (size, size, grid.channels):
            raise ValueError(f"patch shape {block.shape} != ({size}, {size}, {grid.channels})")
        acc[r : r + size, c : c + size, :] += block
        hits[r : r + size, c : c + size, :] += 1.0
    return ImageBuffer(np.clip(acc / hits, 0.0, 1.0))


def add_awgn(img: ImageBuffer, sigma_255: float, seed: int) -> ImageBuffer:
    """Add i.i.d. Gaussian noise of standard deviation sigma_255/255, then clamp."""
    if sigma_255 < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma_255 == 0:
        return img
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(img.samples.shape) * (sigma_255 / 255.0)
    return ImageBuffer(np.clip(img.samples + noise, 0.0, 1.0))


def psnr(reference: ImageBuffer, test: ImageBuffer) -> float:
    """Peak signal-to-noise ratio in dB against peak intensity 1; inf if equal."""
    if reference.samples.shape != test.samples.shape:
        raise ValueError("image dimensions differ")
    mse = float(np.mean((reference.samples - test.samples) ** 2))
    if mse == 0.0:
        return math.inf
    return -10.0 * math.log10(mse)


def ssim(
    reference: ImageBuffer,
    test: ImageBuffer,
    sigma: float = 1.5,
    truncate: float = 3.5,
    k1: float = 0.01,
    k2: float = 0.03,
) -> float:
    """Mean structural similarity over an 11x11 Gaussian window (sigma 1.5).

    Color inputs are reduced to luminance first. Local moments use a
    Gaussian-weighted window; the score is averaged over positions whose
    window lies fully inside the image.
    """
    if reference.samples.shape != test.samples.shape:
        raise ValueError("image dimensions differ")
    a = luminance(reference).plane
    b = luminance(test).plane
    radius = int(truncate * sigma + 0.5)
    win = 2 * radius + 1
    if min(a.shape) < win:
        raise ValueError(f"image smaller than the {win}x{win} SSIM window")

    blur = lambda z: gaussian_filter(z, sigma=sigma, truncate=truncate)
    ux, uy = blur(a), blur(b)
    vx = blur(a * a) - ux * ux
    vy = blur(b * b) - uy * uy
    vxy = blur(a * b) - ux * uy
    c1, c2 = k1 * k1, k2 * k2
    score = ((2 * ux * uy + c1) * (2 * vxy + c2)) / (
        (ux * ux + uy * uy + c1) * (vx + vy + c2)
    )
    return float(np.mean(score[radius:-radius, radius:-radius]))


def _read_header_tokens(data: bytes):
    """Yield (token, end_offset) for whitespace-separated header fields,
    skipping '#' comments, per the netpbm grammar."""
    i = 0
    n = len(data)
    while True:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i] == ord("#"):
            while i < n and data[i] != ord("\n"):
                i += 1
            continue
        if i >= n:
            raise ValueError("truncated header")
        start = i
        while i < n and not data[i : i + 1].isspace() and data[i] != ord("#"):
            i += 1
        yield data[start:i], i


def load_image(path) -> ImageBuffer:
    """Read a binary PGM (P5) or PPM (P6) file with maxval 255."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = _read_header_tokens(data)
    magic, _ = next(tokens)
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise ValueError(f"unsupported magic {magic!r} (want P5 or P6)")
    fields = []
    for _ in range(3):
        tok, end = next(tokens)
        try:
            fields.append(int(tok))
        except ValueError:
            raise ValueError(f"non-numeric header field {tok!r}") from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ValueError("image dimensions must be positive")
    if maxval != 255:
        raise ValueError(f"unsupported maxval {maxval} (only 255)")
    # exactly one whitespace byte separates the header from the raster
    payload = data[end + 1 :]
    expected = height * width * channels
    if len(payload) < expected:
        raise ValueError(f"truncated payload: {len(payload)} bytes, expected {expected}")
    raster = np.frombuffer(payload[:expected], dtype=np.uint8)
    samples = raster.reshape(height, width, channels).astype(np.float64) / 255.0
    return ImageBuffer(samples)


def save_image(img: ImageBuffer, path) -> None:
    """Write ``img`` as binary PGM/PPM, rounding half-up to 8 bits."""
    magic = b"P5" if img.channels == 1 else b"P6"
    quantized = np.floor(img.samples * 255.0 + 0.5)
    raster = np.clip(quantized, 0.0, 255.0).astype(np.uint8)
    header = b"%s\n%d %d\n255\n" % (magic, img.width, img.height)
    with open(path, "wb") as fh:
        fh.write(header + raster.tobytes())
