"""Separable Gaussian smoothing of a volume's normalized intensity."""

from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import correlate1d

from ..volume import Volume, VolumeMeta


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Discrete Gaussian truncated at ceil(3*sigma), renormalized to sum 1."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=float)
    weights = np.exp(-0.5 * (offsets / sigma) ** 2)
    return weights / weights.sum()


def gaussian_blur(volume: Volume, sigma: float) -> Volume:
    """Three-pass separable convolution with clamp-to-edge borders.

    Operates on the normalized intensity and returns a float32 volume with
    identical dims/spacing/origin, so a constant volume stays constant and
    downstream code keeps the [0, 1] scale.
    """
    kernel = gaussian_kernel(sigma)
    out = volume.normalized.astype(np.float64)
    for axis in range(3):  # data is (z, y, x); order does not matter
        out = correlate1d(out, kernel, axis=axis, mode="nearest")
    meta = volume.meta
    blurred_meta = VolumeMeta(dims=meta.dims, dtype="float32", spacing=meta.spacing,
                              endianness=meta.endianness, origin=meta.origin)
    return Volume(meta=blurred_meta, data=out.astype(np.float32))
