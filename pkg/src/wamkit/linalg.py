"""Symmetric-matrix helpers shared by the distance computations.

Everything here works on plain float64 numpy arrays. Covariance matrices are
required to be exactly symmetric (``a[i, j] == a[j, i]`` bitwise); use
:func:`symmetrize` at the boundary when an upstream computation only promises
symmetry up to roundoff. Eigenvalues within roundoff of zero, of either
sign, are clamped to exactly zero; genuine negative spectrum is an error.
"""

from __future__ import annotations

import numpy as np

from .errors import DimMismatch, InvalidInput, NotPositiveSemidefinite

__all__ = [
    "symmetrize",
    "sym_eigendecomp",
    "psd_sqrt",
    "trace_sqrt_product",
    "pack_lower",
    "unpack_lower",
]


def _as_square_sym(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] == 0:
        raise InvalidInput(f"{name} must be at least 1x1")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} contains non-finite entries")
    if not np.array_equal(a, a.T):
        raise InvalidInput(f"{name} is not exactly symmetric; apply symmetrize() first")
    return a


def symmetrize(a) -> np.ndarray:
    """Return ``(a + a.T) / 2``, which is exactly symmetric in IEEE754."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {a.shape}")
    return (a + a.T) / 2.0


def sym_eigendecomp(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of an exactly symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues sorted in
    descending order and eigenvectors in the matching columns, so that
    ``eigenvectors @ diag(eigenvalues) @ eigenvectors.T`` reconstructs ``a``.
    """
    a = _as_square_sym(a)
    vals, vecs = np.linalg.eigh(a)
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def _clamped_spectrum(vals: np.ndarray) -> np.ndarray:
    """Zero out roundoff-scale eigenvalues, reject genuinely negative ones.

    Two tolerances are at work. Negative eigenvalues beyond
    ``1e-8 * max(1, largest)`` mean the matrix is not positive semidefinite
    and raise. Everything below the eigensolver's resolution floor of
    ``8 * n * eps * largest`` is set to exactly zero: a rank-deficient
    matrix comes back from ``eigh`` with its null directions reported as
    eigenvalues of that magnitude, and square roots amplify such noise
    from ``eps`` scale to ``sqrt(eps)`` scale per direction, which then
    accumulates across a large null space. The floor sits many orders of
    magnitude below any eigenvalue the clamp above accepts as meaningful,
    so only numerically unresolvable spectrum is affected.
    """
    largest = float(vals.max())
    tol = 1e-8 * max(1.0, largest)
    if float(vals.min()) < -tol:
        raise NotPositiveSemidefinite(
            f"eigenvalue {vals.min():.6g} below -{tol:.3g}"
        )
    floor = 8.0 * vals.size * np.finfo(np.float64).eps * max(largest, 0.0)
    return np.where(vals <= floor, 0.0, vals)


def psd_sqrt(a) -> np.ndarray:
    """Symmetric square root of a positive semidefinite matrix.

    Computed by eigendecomposition: clamp the spectrum, take elementwise
    square roots, recompose, and symmetrize the result. Raises
    :class:`NotPositiveSemidefinite` when the spectrum is negative beyond
    the clamping tolerance.
    """
    a = _as_square_sym(a)
    vals, vecs = np.linalg.eigh(a)
    vals = _clamped_spectrum(vals)
    root = (vecs * np.sqrt(vals)) @ vecs.T
    return symmetrize(root)


def trace_sqrt_product(s1, s2) -> float:
    """``trace((s1^{1/2} s2 s1^{1/2})^{1/2})`` for PSD ``s1``, ``s2``.

    This is the coupling term of the closed-form Gaussian transport cost.
    The inner product is symmetrized before its spectrum is taken, and the
    usual roundoff clamp applies to both spectra involved.
    """
    s1 = _as_square_sym(s1, "s1")
    s2 = _as_square_sym(s2, "s2")
    if s1.shape != s2.shape:
        raise DimMismatch(f"shape mismatch: {s1.shape} vs {s2.shape}")
    root = psd_sqrt(s1)
    inner = symmetrize(root @ s2 @ root)
    vals = np.linalg.eigvalsh(inner)
    vals = _clamped_spectrum(vals)
    return float(np.sqrt(vals).sum())


def pack_lower(a) -> np.ndarray:
    """Flatten the lower triangle of a symmetric matrix, row-major."""
    a = _as_square_sym(a)
    return a[np.tril_indices(a.shape[0])]


def unpack_lower(flat, dim: int) -> np.ndarray:
    """Rebuild a full symmetric matrix from its row-major lower triangle."""
    flat = np.asarray(flat, dtype=np.float64)
    expected = dim * (dim + 1) // 2
    if flat.ndim != 1 or flat.size != expected:
        raise InvalidInput(
            f"lower triangle for dim {dim} needs {expected} entries, got {flat.size}"
        )
    a = np.zeros((dim, dim))
    a[np.tril_indices(dim)] = flat
    mirror = a.T.copy()
    np.fill_diagonal(mirror, 0.0)
    return a + mirror
