"""Deterministic dense linear algebra helpers.

Everything here wraps LAPACK (via numpy) but pins down the conventions the
rest of the package relies on: descending eigenvalue order, a reproducible
eigenvector sign, clamped singular values for angles.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRetraction, InvalidInput

RANK_RTOL = 1e-12


@dataclass(frozen=True)
class SymEig:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    values[j] pairs with vectors[:, j]; each eigenvector is sign-normalized so
    that its largest-magnitude entry (lowest row index on ties) is nonnegative.
    """

    values: np.ndarray
    vectors: np.ndarray


def sym_eig(a: np.ndarray) -> SymEig:
    """Symmetrize, decompose, order descending, fix signs."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("matrix has non-finite entries")
    sym = (a + a.T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    # reproducible sign: dominant entry of each vector made nonnegative
    lead = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[lead, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs *= signs
    return SymEig(values=vals, vectors=vecs)


def polar_factor(a: np.ndarray) -> np.ndarray:
    """Orthonormal polar factor of a p x q matrix (p >= q).

    This is the closest point of the Stiefel manifold in Frobenius norm.
    Raises DegenerateRetraction if a loses column rank (smallest singular
    value <= RANK_RTOL times the largest).
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] < a.shape[1]:
        raise InvalidInput(f"expected p x q with p >= q, got shape {a.shape}")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s[-1] <= RANK_RTOL * s[0]:
        raise DegenerateRetraction(
            f"column rank lost: singular values span [{s[-1]:.3e}, {s[0]:.3e}]"
        )
    return u @ vt


def principal_angles(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Principal angles between span(u) and span(v), ascending, in radians.

    u is p x a, v is p x b with a <= b; both must have orthonormal columns.
    Returns a angles in [0, pi/2].
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.ndim != 2 or v.ndim != 2 or u.shape[0] != v.shape[0]:
        raise InvalidInput("bases must share the ambient dimension")
    if u.shape[1] > v.shape[1]:
        raise InvalidInput(
            f"first basis wider than second ({u.shape[1]} > {v.shape[1]})"
        )
    for m in (u, v):
        g = m.T @ m
        if np.abs(g - np.eye(m.shape[1])).max() > 1e-8:
            raise InvalidInput("basis columns are not orthonormal (tol 1e-8)")
    s = np.linalg.svd(u.T @ v, compute_uv=False)
    s = np.clip(s, 0.0, 1.0)
    # singular values descend, so arccos already ascends
    return np.arccos(s)
