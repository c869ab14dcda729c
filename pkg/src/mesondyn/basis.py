"""Two-particle configuration space on an open chain.

Sites are labelled 1..L. A sector state places two hard-core bosons at
positions (i1, i2) with i2 < i1. Equivalent labels are the relative
coordinate r = i1 - i2 and the doubled center-of-mass coordinate
cc = i1 + i2; cc is kept as an integer (cc = 2c) so half-integer centers
never touch floating point.

Link spins are determined by the particle positions through the Gauss
law: starting from the all-down vacuum, exactly the links strictly
between the two bosons point up.
"""
import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "TwoParticleBasis",
    "LinkConfig",
    "build_basis",
    "links_from_positions",
    "gauss_law_holds",
]


class TwoParticleBasis:
    """Enumeration of two-boson states with (i1, i2) <-> (r, cc) maps.

    States are ordered by (r, cc), which groups fixed meson sizes into
    contiguous index ranges; the arrays below are aligned with that
    ordering.

    Attributes
    ----------
    L : int
        Number of chain sites.
    dimension : int
        Sector size, L(L-1)/2.
    i1, i2, r, cc : ndarray of int
        Per-state coordinates.
    states : list of (int, int)
        Per-state (i1, i2) tuples in basis order.
    """

    def __init__(self, L):
        if L < 2:
            raise InvalidArgumentError(f"need at least 2 sites, got L={L}")
        self.L = int(L)
        pairs = []
        for r in range(1, L):
            for cc in range(r + 2, 2 * L - r + 1, 2):
                pairs.append((r, cc))
        self.r = np.array([p[0] for p in pairs], dtype=np.int64)
        self.cc = np.array([p[1] for p in pairs], dtype=np.int64)
        self.i1 = (self.cc + self.r) // 2
        self.i2 = (self.cc - self.r) // 2
        self.dimension = len(pairs)
        self.states = list(zip(self.i1.tolist(), self.i2.tolist()))
        self._by_positions = {s: n for n, s in enumerate(self.states)}
        self._by_rc = {rc: n for n, rc in enumerate(pairs)}

    def index_of_positions(self, i1, i2):
        """Dense index of the state with bosons at (i1, i2), i2 < i1."""
        try:
            return self._by_positions[(i1, i2)]
        except KeyError:
            raise InvalidArgumentError(
                f"no state (i1={i1}, i2={i2}) on an L={self.L} chain"
            ) from None

    def index_of_rc(self, r, cc):
        """Dense index of the state with size r and doubled center cc."""
        try:
            return self._by_rc[(r, cc)]
        except KeyError:
            raise InvalidArgumentError(
                f"no state (r={r}, cc={cc}) on an L={self.L} chain"
            ) from None

    def contains_rc(self, r, cc):
        return (r, cc) in self._by_rc

    def __len__(self):
        return self.dimension

    def __repr__(self):
        return f"TwoParticleBasis(L={self.L}, dimension={self.dimension})"


class LinkConfig:
    """Link spins and site occupations for one classical configuration.

    spins[j-1] is sigma^z on link (j, j+1) for j = 1..L-1; occupations
    has one entry per site. Virtual links beyond both chain ends are
    fixed at -1 (vacuum).
    """

    __slots__ = ("spins", "occupations")

    def __init__(self, spins, occupations):
        self.spins = np.asarray(spins, dtype=np.int64)
        self.occupations = np.asarray(occupations, dtype=np.int64)

    @property
    def L(self):
        return len(self.occupations)


def build_basis(L):
    """Enumerate the two-boson sector of an open L-site chain.

    Parameters
    ----------
    L : int
        Site count, at least 2.

    Returns
    -------
    TwoParticleBasis
        States sorted by (r, cc); dimension L(L-1)/2.
    """
    return TwoParticleBasis(L)


def links_from_positions(i1, i2, L):
    """Reconstruct the link-spin configuration for bosons at (i1, i2).

    The Gauss law fixes every link once the matter positions are known:
    links j with i2 <= j < i1 point up (+1), all others down (-1).

    Parameters
    ----------
    i1, i2 : int
        Boson positions with 1 <= i2 < i1 <= L.
    L : int
        Chain length.

    Returns
    -------
    LinkConfig
    """
    if not (1 <= i2 < i1 <= L):
        raise InvalidArgumentError(
            f"positions must satisfy 1 <= i2 < i1 <= L, got ({i1}, {i2}, L={L})"
        )
    links = np.arange(1, L)
    spins = np.where((links >= i2) & (links < i1), 1, -1)
    occ = np.zeros(L, dtype=np.int64)
    occ[[i1 - 1, i2 - 1]] = 1
    return LinkConfig(spins, occ)


def gauss_law_holds(config):
    """Check sigma^z_left * (-1)^n_i * sigma^z_right = +1 at every site.

    Virtual links outside the chain count as -1, so the check covers the
    boundary sites as well.
    """
    L = config.L
    padded = np.empty(L + 1, dtype=np.int64)
    padded[0] = -1
    padded[1:L] = config.spins
    padded[L] = -1
    parity = 1 - 2 * (config.occupations & 1)
    return bool(np.all(padded[:-1] * parity * padded[1:] == 1))
