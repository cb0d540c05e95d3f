"""Per-voxel Hessian matrices and a closed-form symmetric 3x3 eigensolver.

The eigensolver is analytic (trigonometric eigenvalues, cross-product
eigenvectors with degenerate-pair fallbacks) rather than LAPACK so the test
suite can verify it against ``np.linalg.eigh`` as a genuinely independent
oracle.  Eigenvalues are reported sorted by magnitude, |l1| <= |l2| <= |l3|,
the ordering the tubularity measure expects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BorderVoxelError
from ..volume import Volume


@dataclass(frozen=True)
class HessianEigen:
    """Eigenvalues sorted by |value| with matching unit eigenvectors."""

    eigenvalues: tuple[float, float, float]
    eigenvectors: np.ndarray  # (3, 3), row i pairs with eigenvalues[i]


def hessian_matrix_at(data: np.ndarray, spacing, x: int, y: int, z: int) -> np.ndarray:
    """Central second differences at a grid point, scaled by spacing (mm)."""
    nz, ny, nx = data.shape
    if not (1 <= x < nx - 1 and 1 <= y < ny - 1 and 1 <= z < nz - 1):
        raise BorderVoxelError((x, y, z))
    sx, sy, sz = spacing
    c = float(data[z, y, x])
    dxx = (float(data[z, y, x + 1]) - 2 * c + float(data[z, y, x - 1])) / (sx * sx)
    dyy = (float(data[z, y + 1, x]) - 2 * c + float(data[z, y - 1, x])) / (sy * sy)
    dzz = (float(data[z + 1, y, x]) - 2 * c + float(data[z - 1, y, x])) / (sz * sz)
    dxy = (float(data[z, y + 1, x + 1]) - float(data[z, y + 1, x - 1])
           - float(data[z, y - 1, x + 1]) + float(data[z, y - 1, x - 1])) / (4 * sx * sy)
    dxz = (float(data[z + 1, y, x + 1]) - float(data[z + 1, y, x - 1])
           - float(data[z - 1, y, x + 1]) + float(data[z - 1, y, x - 1])) / (4 * sx * sz)
    dyz = (float(data[z + 1, y + 1, x]) - float(data[z + 1, y - 1, x])
           - float(data[z - 1, y + 1, x]) + float(data[z - 1, y - 1, x])) / (4 * sy * sz)
    return np.array([[dxx, dxy, dxz], [dxy, dyy, dyz], [dxz, dyz, dzz]])


def hessian_at(volume: Volume, point) -> HessianEigen:
    """Hessian eigen-decomposition of the normalized intensity at a voxel."""
    x, y, z = (int(v) for v in point)
    h = hessian_matrix_at(volume.normalized, volume.meta.spacing, x, y, z)
    return eig3_sym(h)


def _eigvec_for(a: np.ndarray, lam: float, scale: float) -> np.ndarray | None:
    """Null-space direction of (a - lam I) via the best row cross product."""
    m = a - lam * np.eye(3)
    crosses = [np.cross(m[i], m[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
    norms = [np.linalg.norm(c) for c in crosses]
    best = int(np.argmax(norms))
    if norms[best] <= 1e-12 * max(scale * scale, 1e-30):
        return None  # repeated eigenvalue: 2D (or 3D) null space
    return crosses[best] / norms[best]


def _complement_basis(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ref = np.array([1.0, 0.0, 0.0]) if abs(v[0]) <= 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(v, ref)
    u /= np.linalg.norm(u)
    return u, np.cross(v, u)


def eig3_sym(h: np.ndarray) -> HessianEigen:
    """Closed-form eigen-decomposition of a symmetric 3x3 matrix."""
    a = np.asarray(h, dtype=float)
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return HessianEigen(eigenvalues=(0.0, 0.0, 0.0), eigenvectors=np.eye(3))

    lams = _eigvals_smith(a[None, ...])[0]  # algebraic ascending
    # Pick eigenvectors starting from the best-separated eigenvalue.
    seps = [min(abs(lams[0] - lams[1]), abs(lams[0] - lams[2])),
            min(abs(lams[1] - lams[0]), abs(lams[1] - lams[2])),
            min(abs(lams[2] - lams[0]), abs(lams[2] - lams[1]))]
    order = np.argsort(seps)[::-1]
    vecs: dict[int, np.ndarray] = {}
    first = int(order[0])
    v_first = _eigvec_for(a, lams[first], scale)
    if v_first is None:
        # All eigenvalues (numerically) equal: any orthonormal basis works.
        basis = np.eye(3)
        vecs = {0: basis[0], 1: basis[1], 2: basis[2]}
    else:
        vecs[first] = v_first
        remaining = [i for i in range(3) if i != first]
        u, w = _complement_basis(v_first)
        # Solve the 2x2 restriction of `a` to span{u, w} for the other pair.
        b = np.array([[u @ a @ u, u @ a @ w], [w @ a @ u, w @ a @ w]])
        theta = 0.5 * np.arctan2(2 * b[0, 1], b[0, 0] - b[1, 1])
        c, s = np.cos(theta), np.sin(theta)
        cand1 = c * u + s * w
        cand2 = -s * u + c * w
        val1 = cand1 @ a @ cand1
        val2 = cand2 @ a @ cand2
        i, j = remaining
        if abs(val1 - lams[i]) + abs(val2 - lams[j]) <= abs(val1 - lams[j]) + abs(val2 - lams[i]):
            vecs[i], vecs[j] = cand1, cand2
        else:
            vecs[i], vecs[j] = cand2, cand1

    mag_order = np.argsort(np.abs(lams), kind="stable")
    eigenvalues = tuple(float(lams[k]) for k in mag_order)
    eigenvectors = np.vstack([vecs[int(k)] for k in mag_order])
    return HessianEigen(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def _eigvals_smith(a: np.ndarray) -> np.ndarray:
    """Batched analytic eigenvalues (ascending) of symmetric 3x3 matrices.

    ``a`` is (..., 3, 3); uses the trigonometric form of the characteristic
    cubic (Smith 1961), stable for symmetric input.
    """
    a11, a22, a33 = a[..., 0, 0], a[..., 1, 1], a[..., 2, 2]
    a12, a13, a23 = a[..., 0, 1], a[..., 0, 2], a[..., 1, 2]
    p1 = a12 ** 2 + a13 ** 2 + a23 ** 2
    q = (a11 + a22 + a33) / 3.0
    p2 = (a11 - q) ** 2 + (a22 - q) ** 2 + (a33 - q) ** 2 + 2.0 * p1
    p = np.sqrt(np.maximum(p2 / 6.0, 0.0))
    safe_p = np.where(p > 0, p, 1.0)
    b11, b22, b33 = (a11 - q) / safe_p, (a22 - q) / safe_p, (a33 - q) / safe_p
    b12, b13, b23 = a12 / safe_p, a13 / safe_p, a23 / safe_p
    detb = (b11 * (b22 * b33 - b23 ** 2)
            - b12 * (b12 * b33 - b23 * b13)
            + b13 * (b12 * b23 - b22 * b13))
    r = np.clip(detb / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    lam_hi = q + 2.0 * p * np.cos(phi)
    lam_lo = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    lam_mid = 3.0 * q - lam_hi - lam_lo
    return np.stack([lam_lo, lam_mid, lam_hi], axis=-1)


def eigvals_by_magnitude(components: tuple[np.ndarray, ...]) -> np.ndarray:
    """Eigenvalues sorted by |value| from (dxx, dyy, dzz, dxy, dxz, dyz)."""
    dxx, dyy, dzz, dxy, dxz, dyz = components
    a = np.empty(dxx.shape + (3, 3), dtype=np.float64)
    a[..., 0, 0] = dxx
    a[..., 1, 1] = dyy
    a[..., 2, 2] = dzz
    a[..., 0, 1] = a[..., 1, 0] = dxy
    a[..., 0, 2] = a[..., 2, 0] = dxz
    a[..., 1, 2] = a[..., 2, 1] = dyz
    lams = _eigvals_smith(a)
    order = np.argsort(np.abs(lams), axis=-1, kind="stable")
    return np.take_along_axis(lams, order, axis=-1)


def hessian_field_components(data: np.ndarray, spacing) -> tuple[np.ndarray, ...]:
    """Interior central-difference Hessian components; border entries are 0.

    Returns six full-size float32 arrays (dxx, dyy, dzz, dxy, dxz, dyz).
    """
    sx, sy, sz = spacing
    f = data.astype(np.float32)
    out = [np.zeros_like(f) for _ in range(6)]
    dxx, dyy, dzz, dxy, dxz, dyz = out
    c = f[1:-1, 1:-1, 1:-1]
    dxx[1:-1, 1:-1, 1:-1] = (f[1:-1, 1:-1, 2:] - 2 * c + f[1:-1, 1:-1, :-2]) / (sx * sx)
    dyy[1:-1, 1:-1, 1:-1] = (f[1:-1, 2:, 1:-1] - 2 * c + f[1:-1, :-2, 1:-1]) / (sy * sy)
    dzz[1:-1, 1:-1, 1:-1] = (f[2:, 1:-1, 1:-1] - 2 * c + f[:-2, 1:-1, 1:-1]) / (sz * sz)
    dxy[1:-1, 1:-1, 1:-1] = (f[1:-1, 2:, 2:] - f[1:-1, 2:, :-2]
                             - f[1:-1, :-2, 2:] + f[1:-1, :-2, :-2]) / (4 * sx * sy)
    dxz[1:-1, 1:-1, 1:-1] = (f[2:, 1:-1, 2:] - f[2:, 1:-1, :-2]
                             - f[:-2, 1:-1, 2:] + f[:-2, 1:-1, :-2]) / (4 * sx * sz)
    dyz[1:-1, 1:-1, 1:-1] = (f[2:, 2:, 1:-1] - f[2:, :-2, 1:-1]
                             - f[:-2, 2:, 1:-1] + f[:-2, :-2, 1:-1]) / (4 * sy * sz)
    return tuple(out)
