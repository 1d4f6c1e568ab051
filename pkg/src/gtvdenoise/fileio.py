"""Binary transport formats for learned per-layer inputs.

Two little-endian containers move data from a trainer into the denoiser:
feature maps (magic ``DGTVFEAT``) carrying per-pixel feature vectors for a
whole image, and filter-strength files (magic ``DGTVMU__``) carrying one
positive scalar per patch per layer (or a single broadcast value).
Payloads are 32-bit floats; readers reject wrong magic, wrong version,
and payloads whose length disagrees with the header.
"""

from __future__ import annotations

import struct

import numpy as np

from .graphs import FeatureMap

__all__ = [
    "FEATURE_MAGIC",
    "MU_MAGIC",
    "FORMAT_VERSION",
    "load_feature_file",
    "save_feature_file",
    "load_mu",
    "save_mu",
]

FEATURE_MAGIC = b"DGTVFEAT"
MU_MAGIC = b"DGTVMU__"
FORMAT_VERSION = 1


def _check_header(data: bytes, magic: bytes, path) -> None:
    if len(data) < 12:
        raise ValueError(f"{path}: file too short for a header")
    if data[:8] != magic:
        raise ValueError(f"{path}: bad magic {data[:8]!r}, want {magic!r}")
    (version,) = struct.unpack_from("<I", data, 8)
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")


def load_feature_file(path) -> FeatureMap:
    """Read a whole-image feature map: header (height, width, k) + float32 grid."""
    with open(path, "rb") as fh:
        data = fh.read()
    _check_header(data, FEATURE_MAGIC, path)
    if len(data) < 24:
        raise ValueError(f"{path}: truncated header")
    height, width, k = struct.unpack_from("<III", data, 12)
    if height < 1 or width < 1 or k < 1:
        raise ValueError(f"{path}: non-positive dimensions ({height}, {width}, {k})")
    expected = 24 + 4 * height * width * k
    if len(data) != expected:
        raise ValueError(f"{path}: payload is {len(data) - 24} bytes, header implies {expected - 24}")
    values = np.frombuffer(data, dtype="<f4", count=height * width * k, offset=24)
    return FeatureMap(height=height, width=width, values=values.reshape(height * width, k))


def save_feature_file(path, features: FeatureMap) -> None:
    header = FEATURE_MAGIC + struct.pack(
        "<IIII", FORMAT_VERSION, features.height, features.width, features.k
    )
    with open(path, "wb") as fh:
        fh.write(header + np.ascontiguousarray(features.values, dtype="<f4").tobytes())


def load_mu(path) -> np.ndarray:
    """Read per-patch-per-layer filter strengths; returns a 1-D float64 array.

    A count of 1 is the broadcast form (same strength everywhere); otherwise
    the caller must check the count against its patch and layer counts
    (patch-major layout: value index = patch * layers + layer).
    """
    with open(path, "rb") as fh:
        data = fh.read()
    _check_header(data, MU_MAGIC, path)
    if len(data) < 16:
        raise ValueError(f"{path}: truncated header")
    (count,) = struct.unpack_from("<I", data, 12)
    if count < 1:
        raise ValueError(f"{path}: count must be >= 1")
    if len(data) != 16 + 4 * count:
        raise ValueError(f"{path}: payload is {len(data) - 16} bytes, header implies {4 * count}")
    values = np.frombuffer(data, dtype="<f4", count=count, offset=16).astype(np.float64)
    if not np.all(values > 0):
        raise ValueError(f"{path}: all values must be positive")
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{path}: all values must be finite")
    return values


def save_mu(path, values) -> None:
    arr = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("values must be a nonempty 1-D array")
    if not np.all(arr > 0):
        raise ValueError("all values must be positive")
    header = MU_MAGIC + struct.pack("<II", FORMAT_VERSION, arr.size)
    with open(path, "wb") as fh:
        fh.write(header + arr.astype("<f4").tobytes())
