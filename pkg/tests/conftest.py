import numpy as np
import pytest

from mesondyn.basis import build_basis
from mesondyn.hamiltonian import build_sector_hamiltonian
from mesondyn.linalg import eig_symmetric


class SectorCache:
    """Memoized (basis, operator, spectrum) per (L, J, h).

    Dense eigendecompositions dominate the suite's runtime; several
    checks share the same operator, so decompose once.
    """

    def __init__(self):
        self._store = {}

    def get(self, L, J, h):
        key = (int(L), float(J), float(h))
        if key not in self._store:
            basis = build_basis(key[0])
            op = build_sector_hamiltonian(basis, key[1], key[2])
            self._store[key] = (basis, op, eig_symmetric(op))
        return self._store[key]


@pytest.fixture(scope="session")
def sector_cache():
    return SectorCache()


@pytest.fixture()
def rng():
    return np.random.default_rng(20260815)
