"""Vectorised eigenvalues of symmetric 3x3 matrices.

The bulk of the points is handled by the closed-form trigonometric solution of
the characteristic cubic.  That formula loses accuracy when two eigenvalues
(nearly) coincide, because ``arccos`` is ill-conditioned at ±1; those points are
recomputed with cyclic Jacobi rotations, which are backward stable.
"""
from __future__ import annotations

import numpy as np

#: Points whose normalised discriminant ``1 - r**2`` falls below this value are
#: routed to the Jacobi fallback.
DISCRIMINANT_TOL = 1e-13
JACOBI_SWEEPS = 10


def _closed_form(a11, a22, a33, a12, a13, a23):
    q = (a11 + a22 + a33) / 3.0
    p1 = a12**2 + a13**2 + a23**2
    b11, b22, b33 = a11 - q, a22 - q, a33 - q
    p2 = b11**2 + b22**2 + b33**2 + 2.0 * p1
    p = np.sqrt(p2 / 6.0)
    safe_p = np.where(p > 0, p, 1.0)
    c11, c22, c33 = b11 / safe_p, b22 / safe_p, b33 / safe_p
    c12, c13, c23 = a12 / safe_p, a13 / safe_p, a23 / safe_p
    det = (
        c11 * (c22 * c33 - c23 * c23)
        - c12 * (c12 * c33 - c23 * c13)
        + c13 * (c12 * c23 - c22 * c13)
    )
    r = np.clip(0.5 * det, -1.0, 1.0)
    r = np.where(p > 0, r, 0.0)
    phi = np.arccos(r) / 3.0
    l3 = q + 2.0 * p * np.cos(phi)
    l1 = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    l2 = 3.0 * q - l1 - l3
    disc = np.where(p > 0, 1.0 - r * r, 1.0)
    return l1, l2, l3, disc


def jacobi_eigenvalues(mats: np.ndarray, sweeps: int = JACOBI_SWEEPS) -> np.ndarray:
    """Eigenvalues of a stack ``(m, 3, 3)`` of symmetric matrices, unsorted."""
    a = np.array(mats, dtype=float, copy=True)
    idx = np.arange(a.shape[0])
    for _ in range(sweeps):
        for i, j in ((0, 1), (0, 2), (1, 2)):
            aij = a[idx, i, j]
            active = np.abs(aij) > 0
            if not np.any(active):
                continue
            aii = a[idx, i, i]
            ajj = a[idx, j, j]
            safe = np.where(active, aij, 1.0)
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                theta = (ajj - aii) / (2.0 * safe)
                big = ~(np.abs(theta) < 1e150)
                tb = np.where(big, 1.0, theta)
                t = np.sign(tb) / (np.abs(tb) + np.sqrt(tb * tb + 1.0))
                # tiny off-diagonal entry: t ~ 1/(2 theta)
                t = np.where(big, 0.5 / theta, t)
            t = np.where(theta == 0, 1.0, t)
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # rotation G acting on rows/columns i, j: A <- G^T A G
            rot = np.zeros_like(a)
            rot[:, 0, 0] = rot[:, 1, 1] = rot[:, 2, 2] = 1.0
            rot[:, i, i] = c
            rot[:, j, j] = c
            rot[:, i, j] = s
            rot[:, j, i] = -s
            a = np.einsum("mki,mkl,mlj->mij", rot, a, rot)
            # clean the annihilated entry exactly
            a[idx, i, j] = np.where(active, 0.0, a[idx, i, j])
            a[idx, j, i] = a[idx, i, j]
    return np.stack([a[:, 0, 0], a[:, 1, 1], a[:, 2, 2]], axis=-1)


def symmetric_eigenvalues(a11, a22, a33, a12, a13, a23, tol: float = DISCRIMINANT_TOL):
    """Sorted eigenvalues ``(l1, l2, l3)`` of symmetric matrices given by components.

    All inputs are broadcast to a common shape; the outputs have that shape and
    satisfy ``l1 <= l2 <= l3`` pointwise.
    """
    comps = np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in (a11, a22, a33, a12, a13, a23)))
    shape = comps[0].shape
    flat = [c.reshape(-1) for c in comps]
    l1, l2, l3, disc = _closed_form(*flat)
    lam = np.stack([l1, l2, l3], axis=-1)
    bad = disc < tol
    if np.any(bad):
        f11, f22, f33, f12, f13, f23 = (c[bad] for c in flat)
        mats = np.empty((f11.size, 3, 3))
        mats[:, 0, 0], mats[:, 1, 1], mats[:, 2, 2] = f11, f22, f33
        mats[:, 0, 1] = mats[:, 1, 0] = f12
        mats[:, 0, 2] = mats[:, 2, 0] = f13
        mats[:, 1, 2] = mats[:, 2, 1] = f23
        lam[bad] = jacobi_eigenvalues(mats)
    lam = np.sort(lam, axis=-1, kind="stable")
    return tuple(lam[:, i].reshape(shape) for i in range(3))
