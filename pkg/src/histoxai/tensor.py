"""Tensor conventions and seeded randomness.

Every image-like value in this package is a float64 numpy array in
(batch, channel, height, width) order, called a "tensor4" throughout.
All randomness flows from integer seeds through named sub-streams so
each component (data synthesis, weight init, batch shuffling) can be
reproduced in isolation.
"""

from __future__ import annotations

import zlib

import numpy as np

DTYPE = np.float64


def as_tensor4(values, name: str = "input") -> np.ndarray:
    """Coerce to a float64 (n, c, h, w) array, validating rank."""
    arr = np.asarray(values, dtype=DTYPE)
    if arr.ndim != 4:
        raise ValueError(f"{name} must be 4-D (n, c, h, w), got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise ValueError(f"{name} has an empty axis: shape {arr.shape}")
    return arr


def check_finite(arr: np.ndarray, where: str) -> None:
    """Reject NaN/Inf. Called from layer code under ``if __debug__``."""
    if not np.all(np.isfinite(arr)):
        raise FloatingPointError(f"non-finite values after {where}")


def stream_seed(root_seed: int, name: str) -> int:
    """Derive the integer seed of a named sub-stream of ``root_seed``.

    Uses a CRC of the stream name rather than ``hash()`` so the derivation
    is stable across interpreter runs.
    """
    ss = np.random.SeedSequence([int(root_seed), zlib.crc32(name.encode("ascii"))])
    return int(ss.generate_state(1)[0])


def stream_rng(root_seed: int, name: str) -> np.random.Generator:
    """PCG64 generator for the named sub-stream of ``root_seed``."""
    return np.random.default_rng(stream_seed(root_seed, name))
