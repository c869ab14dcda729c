"""Dense symmetric eigensolvers, spectral propagation, and the special
functions the bound-state analysis leans on.

The heavy kernels (Householder reduction, QL iteration) live in a compiled
extension when one is available; ``BACKEND`` reports which lane was picked
at import time.
"""

from .kernels import BACKEND
from .eig import (
    DENSE_LIMIT,
    Spectrum,
    eig_symmetric,
    eig_tridiagonal,
    spectral_propagate,
)
from .special import airy_ai, airy_ai_prime, airy_zero, bessel_j

__all__ = [
    "BACKEND",
    "DENSE_LIMIT",
    "Spectrum",
    "eig_symmetric",
    "eig_tridiagonal",
    "spectral_propagate",
    "airy_ai",
    "airy_ai_prime",
    "airy_zero",
    "bessel_j",
]
