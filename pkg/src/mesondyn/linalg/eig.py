"""Symmetric eigendecomposition and spectral time propagation."""
from dataclasses import dataclass

import numpy as np

from ..errors import CapacityError, InvalidArgumentError
from ..hamiltonian import SparseSymmetricOperator, TridiagonalOperator
from . import kernels

__all__ = ["Spectrum", "eig_symmetric", "eig_tridiagonal", "spectral_propagate",
           "DENSE_LIMIT"]

DENSE_LIMIT = 8000

# Eigenvalues closer than this (relative to the spectral radius) are
# treated as one degenerate cluster and re-orthonormalized.
CLUSTER_GAP = 1e-9


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in ascending order with column-aligned eigenvectors.

    max_residual is the largest ||A v - lambda v||_2 over all pairs,
    measured against the operator the decomposition was computed from.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    max_residual: float

    @property
    def dimension(self):
        return len(self.eigenvalues)

    def orthonormality_defect(self):
        """max |V^T V - I|, useful as a quick health check."""
        v = self.eigenvectors
        gram = v.T @ v
        return float(np.abs(gram - np.eye(v.shape[1])).max())


def _reorthonormalize_clusters(lam, v):
    scale = float(np.abs(lam).max(initial=0.0))
    if scale == 0.0:
        return
    tol = CLUSTER_GAP * scale
    n = len(lam)
    i = 0
    while i < n:
        j = i + 1
        while j < n and lam[j] - lam[j - 1] < tol:
            j += 1
        if j - i > 1:
            # modified Gram-Schmidt in index order inside the cluster
            for c in range(i, j):
                col = v[:, c]
                for b in range(i, c):
                    col -= (v[:, b] @ col) * v[:, b]
                col /= np.sqrt(col @ col)
        i = j


def _finish(lam, z, apply_op):
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    v = z[:, order]
    _reorthonormalize_clusters(lam, v)
    resid = apply_op(v) - v * lam
    max_residual = float(np.sqrt((resid * resid).sum(axis=0)).max())
    return Spectrum(lam, v, max_residual)


def eig_symmetric(op, dense_limit=DENSE_LIMIT):
    """Full eigendecomposition of a real symmetric operator.

    Parameters
    ----------
    op : SparseSymmetricOperator or ndarray
        Operator to decompose; a 2-d array is taken as an already dense
        symmetric matrix.
    dense_limit : int
        Refuse dimensions above this. The dense path holds three n x n
        float64 tables at once.

    Returns
    -------
    Spectrum
    """
    if isinstance(op, SparseSymmetricOperator):
        n = op.dimension
        if n > dense_limit:
            raise CapacityError(
                f"dimension {n} exceeds dense limit {dense_limit}; "
                "evolve with the fixed-step integrator instead"
            )
        dense = op.to_dense()
    else:
        dense = np.array(op, dtype=np.float64)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise InvalidArgumentError("expected a square matrix")
        n = dense.shape[0]
        if n > dense_limit:
            raise CapacityError(
                f"dimension {n} exceeds dense limit {dense_limit}; "
                "evolve with the fixed-step integrator instead"
            )
    work = np.ascontiguousarray(dense)
    if work is dense:
        work = dense.copy()
    d, e, hh = kernels.tred2(work)
    z = kernels.accumulate_q(work, hh)
    kernels.tql2(d, e, z)
    return _finish(d, z, lambda v: dense @ v)


def eig_tridiagonal(op):
    """Eigendecomposition specialized to a TridiagonalOperator."""
    if not isinstance(op, TridiagonalOperator):
        raise InvalidArgumentError("expected a TridiagonalOperator")
    n = op.dimension
    d = op.diagonal.copy()
    e = np.zeros(n)
    e[1:] = op.off_diagonal
    z = np.eye(n)
    kernels.tql2(d, e, z)

    diag = op.diagonal
    off = op.off_diagonal

    def apply_op(v):
        out = diag[:, None] * v
        out[:-1] += off[:, None] * v[1:]
        out[1:] += off[:, None] * v[:-1]
        return out

    return _finish(d, z, apply_op)


def spectral_propagate(spectrum, psi0, times):
    """Amplitude table psi(t) = V exp(-i diag(lam) t) V^T psi0.

    Parameters
    ----------
    spectrum : Spectrum
    psi0 : complex ndarray
        Initial amplitudes, length = dimension.
    times : ndarray
        Times in units of 1/J.

    Returns
    -------
    complex ndarray of shape (dimension, len(times))
    """
    lam = spectrum.eigenvalues
    v = spectrum.eigenvectors
    psi0 = np.asarray(psi0)
    if psi0.shape != (len(lam),):
        raise InvalidArgumentError("state and spectrum dimensions differ")
    times = np.asarray(times, dtype=np.float64)
    # real products throughout: complex promotion of v would copy the table
    psi0 = np.asarray(psi0, dtype=np.complex128)
    w = v.T @ psi0.real + 1j * (v.T @ psi0.imag)
    coef = w[:, None] * np.exp(-1j * np.outer(lam, times))
    return v @ coef.real + 1j * (v @ coef.imag)
