"""Confined pair dynamics on a Z2 gauge chain.

Simulation and analysis toolkit for the two-particle sector of a
one-dimensional particle-conserving Z2 lattice gauge theory: exact
sector Hamiltonians, spectral and split-step time evolution, bound-state
spectra, and projective snapshot sampling.
"""

__version__ = "0.1.0"

from .errors import CapacityError, InvalidArgumentError, MesondynError
from .basis import (
    LinkConfig,
    TwoParticleBasis,
    build_basis,
    gauss_law_holds,
    links_from_positions,
)
from .hamiltonian import (
    SparseSymmetricOperator,
    TridiagonalOperator,
    build_momentum_block,
    build_sector_hamiltonian,
    default_r_max,
)

__all__ = [
    "__version__",
    "MesondynError",
    "InvalidArgumentError",
    "CapacityError",
    "TwoParticleBasis",
    "LinkConfig",
    "build_basis",
    "links_from_positions",
    "gauss_law_holds",
    "SparseSymmetricOperator",
    "TridiagonalOperator",
    "build_sector_hamiltonian",
    "build_momentum_block",
    "default_r_max",
]
