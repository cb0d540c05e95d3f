"""Bright-tube ridge response from Hessian eigenvalues.

Frangi-style combination for tubes brighter than their surroundings: with
eigenvalues sorted |l1| <= |l2| <= |l3| the response is zero unless both
l2 < 0 and l3 < 0, otherwise

    (1 - exp(-Ra^2 / 2 alpha^2)) * exp(-Rb^2 / 2 beta^2)
        * (1 - exp(-S^2 / 2 gamma^2))

with Ra = |l2|/|l3| (plate vs. tube), Rb = |l1| / sqrt(|l2 l3|) (blob
rejection), S the Frobenius norm, alpha = beta = 0.5, and gamma chosen by
the caller (half the maximum Frobenius norm over the volume in the
extraction pipeline).  The response lies in [0, 1) and grows monotonically
with tube contrast.
"""

from __future__ import annotations

import numpy as np

ALPHA = 0.5
BETA = 0.5


def tubularity(eigenvalues, gamma: float) -> float:
    """Scalar bright-tube response for one sorted eigenvalue triple."""
    lams = np.asarray(eigenvalues, dtype=float).reshape(1, 3)
    return float(tubularity_batch(lams, gamma)[0])


def tubularity_batch(eigenvalues: np.ndarray, gamma: float) -> np.ndarray:
    """Vectorized response; ``eigenvalues`` is (..., 3) sorted by magnitude."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    l1 = eigenvalues[..., 0]
    l2 = eigenvalues[..., 1]
    l3 = eigenvalues[..., 2]
    bright = (l2 < 0) & (l3 < 0)
    a2 = np.abs(l2)
    a3 = np.abs(l3)
    safe3 = np.where(a3 > 0, a3, 1.0)
    ra2 = (a2 / safe3) ** 2
    prod = a2 * a3
    rb2 = l1 ** 2 / np.where(prod > 0, prod, 1.0) * (prod > 0)
    s2 = l1 ** 2 + l2 ** 2 + l3 ** 2
    response = (
        (1.0 - np.exp(-ra2 / (2.0 * ALPHA ** 2)))
        * np.exp(-rb2 / (2.0 * BETA ** 2))
        * (1.0 - np.exp(-s2 / (2.0 * gamma ** 2)))
    )
    return np.where(bright, response, 0.0)


def frobenius_norm_field(components: tuple[np.ndarray, ...]) -> np.ndarray:
    dxx, dyy, dzz, dxy, dxz, dyz = components
    return np.sqrt(dxx ** 2 + dyy ** 2 + dzz ** 2
                   + 2.0 * (dxy ** 2 + dxz ** 2 + dyz ** 2))
