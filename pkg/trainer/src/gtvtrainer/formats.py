"""Writers and readers for the denoiser's binary input containers.

The denoiser consumes two little-endian files: a whole-image feature
map (magic ``DGTVFEAT``) and a list of positive per-patch filter
strengths (magic ``DGTVMU__``). Both carry a u32 format version, shape
or count fields, and a float32 payload. This module implements the
formats independently on the trainer side; the byte layout is the
contract between the two components.
"""

from __future__ import annotations

import struct

import numpy as np

__all__ = [
    "FEATURE_MAGIC",
    "MU_MAGIC",
    "FORMAT_VERSION",
    "write_feature_file",
    "read_feature_file",
    "write_mu_file",
    "read_mu_file",
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


def write_feature_file(path, values: np.ndarray) -> None:
    """Write an (height, width, k) float array as a feature-map file."""
    arr = np.asarray(values)
    if arr.ndim != 3 or min(arr.shape) < 1:
        raise ValueError(f"expected a (height, width, k) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("feature values must be finite")
    height, width, k = arr.shape
    header = FEATURE_MAGIC + struct.pack("<IIII", FORMAT_VERSION, height, width, k)
    with open(path, "wb") as fh:
        fh.write(header + np.ascontiguousarray(arr, dtype="<f4").tobytes())


def read_feature_file(path) -> np.ndarray:
    """Read a feature-map file back as an (height, width, k) float32 array."""
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
        raise ValueError(
            f"{path}: payload is {len(data) - 24} bytes, header implies {expected - 24}"
        )
    values = np.frombuffer(data, dtype="<f4", count=height * width * k, offset=24)
    return values.reshape(height, width, k).copy()


def write_mu_file(path, values) -> None:
    """Write a 1-D array of positive filter strengths (patch-major order)."""
    arr = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("values must be a nonempty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("all values must be finite")
    # write through float32 first: positivity must hold for what the reader sees
    payload = arr.astype("<f4")
    if not np.all(payload > 0):
        raise ValueError("all values must be positive (after float32 rounding)")
    header = MU_MAGIC + struct.pack("<II", FORMAT_VERSION, arr.size)
    with open(path, "wb") as fh:
        fh.write(header + payload.tobytes())


def read_mu_file(path) -> np.ndarray:
    """Read a strengths file back as a 1-D float64 array."""
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
    return values
