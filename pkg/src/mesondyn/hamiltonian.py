"""Sector Hamiltonian and Wannier-Stark momentum blocks.

The two-boson sector couples states by single-boson hops: each hop
changes both r and cc by exactly one. The diagonal is the electric-field
string energy 2*h*r. Projecting the infinite-chain problem onto a fixed
center-of-mass momentum k leaves a tridiagonal operator in r with a hard
wall below r = 1.
"""
import math

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "SparseSymmetricOperator",
    "TridiagonalOperator",
    "build_sector_hamiltonian",
    "build_momentum_block",
    "default_r_max",
]


class SparseSymmetricOperator:
    """Real symmetric operator stored as upper-triangle triplets.

    Entries hold (row, col, value) with row <= col; the transpose part
    is implied. Values are in units of J.
    """

    __slots__ = ("dimension", "rows", "cols", "values", "_csr")

    def __init__(self, dimension, rows, cols, values):
        self.dimension = int(dimension)
        self.rows = np.asarray(rows, dtype=np.int64)
        self.cols = np.asarray(cols, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.float64)
        self._csr = None
        if np.any(self.rows > self.cols):
            raise InvalidArgumentError("entries must satisfy row <= col")

    def to_dense(self):
        """Densify with explicit symmetric closure."""
        a = np.zeros((self.dimension, self.dimension))
        a[self.rows, self.cols] = self.values
        off = self.rows != self.cols
        a[self.cols[off], self.rows[off]] = self.values[off]
        return a

    def _ensure_csr(self):
        # Row-grouped symmetric closure so products are plain segment
        # sums. A zero diagonal is forced on every row: reduceat cannot
        # represent empty segments.
        if self._csr is None:
            off = self.rows != self.cols
            rr = np.concatenate([self.rows, self.cols[off], np.arange(self.dimension)])
            cc = np.concatenate([self.cols, self.rows[off], np.arange(self.dimension)])
            vv = np.concatenate([self.values, self.values[off], np.zeros(self.dimension)])
            order = np.argsort(rr, kind="stable")
            rr = rr[order]
            ptr = np.searchsorted(rr, np.arange(self.dimension))
            self._csr = (ptr, cc[order], vv[order])
        return self._csr

    def matvec(self, x):
        """Symmetric matrix-vector product; x may be real or complex."""
        ptr, cols, vals = self._ensure_csr()
        x = np.asarray(x)
        return np.add.reduceat(vals * x[cols], ptr)

    def matmat(self, x, chunk=256):
        """Product against a dense matrix of column vectors."""
        ptr, cols, vals = self._ensure_csr()
        x = np.asarray(x)
        y = np.empty(x.shape, dtype=np.result_type(x, vals))
        for lo in range(0, x.shape[1], chunk):
            blk = x[:, lo:lo + chunk]
            y[:, lo:lo + chunk] = np.add.reduceat(vals[:, None] * blk[cols], ptr, axis=0)
        return y

    def diagonal(self):
        d = np.zeros(self.dimension)
        on = self.rows == self.cols
        d[self.rows[on]] = self.values[on]
        return d

    def spectral_radius_bound(self):
        """Gershgorin-style bound max_i (|a_ii| + sum_j |a_ij|)."""
        radius = np.zeros(self.dimension)
        np.add.at(radius, self.rows, np.abs(self.values))
        off = self.rows != self.cols
        np.add.at(radius, self.cols[off], np.abs(self.values[off]))
        return float(radius.max(initial=0.0))

    def write_triplets(self, f):
        """Dump entries as 'row col value' lines (1-based indices)."""
        f.write(f"% symmetric sparse operator, dimension {self.dimension}\n")
        f.write(f"{self.dimension} {self.dimension} {len(self.values)}\n")
        for r, c, v in zip(self.rows, self.cols, self.values):
            f.write(f"{r + 1} {c + 1} {float(v)!r}\n")


class TridiagonalOperator:
    """Symmetric tridiagonal operator for one center-of-mass momentum.

    diagonal[r-1] = 2*h*r for r = 1..r_max; the off-diagonal is the
    constant -2*J*cos(k/2). Truncation at r_max and the absence of an
    r = 0 row implement the hard walls.
    """

    __slots__ = ("diagonal", "off_diagonal", "k")

    def __init__(self, diagonal, off_diagonal, k):
        self.diagonal = np.asarray(diagonal, dtype=np.float64)
        self.off_diagonal = np.asarray(off_diagonal, dtype=np.float64)
        self.k = float(k)
        if len(self.off_diagonal) != len(self.diagonal) - 1:
            raise InvalidArgumentError("off-diagonal must have length n-1")

    @property
    def dimension(self):
        return len(self.diagonal)

    def to_dense(self):
        a = np.diag(self.diagonal)
        n = self.dimension
        idx = np.arange(n - 1)
        a[idx, idx + 1] = self.off_diagonal
        a[idx + 1, idx] = self.off_diagonal
        return a

    def matvec(self, x):
        y = self.diagonal * x
        y[:-1] += self.off_diagonal * x[1:]
        y[1:] += self.off_diagonal * x[:-1]
        return y


def build_sector_hamiltonian(basis, J, h):
    """Assemble the two-boson Hamiltonian on the given basis.

    Diagonal entries are 2*h*r; every allowed single-boson hop
    contributes an off-diagonal -J. Hops that would put the bosons on
    the same site or off the chain are absent, so r = 1 states have no
    coupling downward.

    Parameters
    ----------
    basis : TwoParticleBasis
    J : float
        Hopping energy. J = 0 is allowed (diagonal operator, frozen
        dynamics); negative J is not.
    h : float
        Field (string tension) energy.

    Returns
    -------
    SparseSymmetricOperator
    """
    if J < 0 or not math.isfinite(J):
        raise InvalidArgumentError(f"J must be nonnegative, got {J}")
    L = basis.L
    rows = list(range(basis.dimension))
    cols = list(range(basis.dimension))
    values = (2.0 * h * basis.r).tolist()
    for n, (i1, i2) in enumerate(basis.states):
        for j1, j2 in ((i1 + 1, i2), (i1 - 1, i2), (i1, i2 + 1), (i1, i2 - 1)):
            if 1 <= j2 < j1 <= L:
                m = basis.index_of_positions(j1, j2)
                if m > n:
                    rows.append(n)
                    cols.append(m)
                    values.append(-J)
    return SparseSymmetricOperator(basis.dimension, rows, cols, values)


def build_momentum_block(k, J, h, r_max):
    """Tridiagonal Wannier-Stark block at center-of-mass momentum k.

    Parameters
    ----------
    k : float
        Momentum in radians, |k| <= 2*pi.
    J, h : float
        Hopping and field energies.
    r_max : int
        Truncation of the relative coordinate, at least 2.

    Returns
    -------
    TridiagonalOperator
    """
    if r_max < 2:
        raise InvalidArgumentError(f"r_max must be at least 2, got {r_max}")
    if abs(k) > 2 * math.pi + 1e-12:
        raise InvalidArgumentError(f"|k| must not exceed 2*pi, got {k}")
    diag = 2.0 * h * np.arange(1, r_max + 1, dtype=np.float64)
    off = np.full(r_max - 1, -2.0 * J * math.cos(0.5 * k))
    return TridiagonalOperator(diag, off, k)


def default_r_max(J, h):
    """Truncation that keeps small-h/J eigenfunction tails on the grid."""
    return max(50, math.ceil(10.0 * J / h) + 20)
