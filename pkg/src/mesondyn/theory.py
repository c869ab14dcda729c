"""Closed-form limit results used as oracles against the numerics.

Large-field quantized levels, weak-field Airy levels, the tilted-state
energy, breathing formulas, and the perturbative meson-hopping matrix
elements. Everything here is a pure function of the couplings; energies
are in units of J unless a J argument says otherwise.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import InvalidArgumentError
from .linalg import airy_zero, bessel_j

__all__ = [
    "LimitPrediction",
    "quantized_energy_large_h",
    "airy_energy",
    "theta_energy",
    "breathing_amplitude",
    "ravg_large_h",
    "hopping_matrix_element",
    "hopping_matrix_element_log",
    "hopping_log_stirling",
    "peak_meson_length",
    "PeakLength",
    "bessel_limit_eigenvector",
    "evaluate",
]

REGIMES = ("large-h", "small-h", "exact")

MAX_HOPPING_ORDER = 150


@dataclass(frozen=True)
class LimitPrediction:
    quantity: str
    value: float
    regime: str

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise InvalidArgumentError(f"unknown regime {self.regime!r}")
        if not math.isfinite(self.value):
            raise InvalidArgumentError("prediction must be finite")


def quantized_energy_large_h(n, h):
    """Deep-confinement level 2*h*n (size-n meson, n >= 1)."""
    n = int(n)
    if n < 1:
        raise InvalidArgumentError("level index must be >= 1")
    return 2.0 * h * n


def airy_energy(n, k, h, J=1.0):
    """Weak-field level above the free two-particle band bottom.

    -2 z_n (J h^2 cos(k/2))^(1/3) with z_n the n-th negative Airy zero.
    This is the confinement energy relative to -4J cos(k/2); add that
    offset when comparing against raw momentum-block eigenvalues.
    """
    n = int(n)
    if n < 1:
        raise InvalidArgumentError("level index must be >= 1")
    if h <= 0:
        raise InvalidArgumentError("h must be positive")
    ck = math.cos(k / 2.0)
    if ck <= 0.0:
        raise InvalidArgumentError(
            "cos(k/2) must be positive; the continuum scaling degenerates"
        )
    return -2.0 * airy_zero(n) * (J * h * h * ck) ** (1.0 / 3.0)


def theta_energy(theta, h, J=1.0):
    """Energy of the tilted initial state: J sin(θ) + 2h sin²(θ/2) + 2h."""
    theta = float(theta)
    if not 0.0 <= theta <= math.pi:
        raise InvalidArgumentError("theta must lie in [0, pi]")
    s = math.sin(theta / 2.0)
    return J * math.sin(theta) + 2.0 * h * s * s + 2.0 * h


def breathing_amplitude(t, h, J=1.0):
    """Size-spread envelope sqrt(2) (J/h) |sin(h t)| for r0 > 1."""
    if h <= 0:
        raise InvalidArgumentError("h must be positive")
    return math.sqrt(2.0) * (J / h) * abs(math.sin(h * t))


def ravg_large_h(t, h, J=1.0):
    """Leading-order mean size of the r0 = 1 meson at large h/J.

    1 + J²/(2h²) + J² sin²(ht)/(2h²); its time average is 1 + 3J²/(4h²).
    """
    if h <= 0:
        raise InvalidArgumentError("h must be positive")
    s = math.sin(h * t)
    jj = (J / h) ** 2
    return 1.0 + 0.5 * jj + 0.5 * jj * s * s


def hopping_matrix_element_log(n, h, J=1.0):
    """log |H_2n| evaluated stably: the 2n-th order translation element."""
    n = int(n)
    if not 1 <= n <= MAX_HOPPING_ORDER:
        raise InvalidArgumentError(
            f"meson length must lie in 1..{MAX_HOPPING_ORDER}"
        )
    if h <= 0 or J <= 0:
        raise InvalidArgumentError("couplings must be positive")
    return (math.log(J) + (2 * n - 1) * (math.log(J) - math.log(2.0 * h))
            + math.log(n) - 2.0 * math.lgamma(n + 1))


def hopping_matrix_element(n, h, J=1.0):
    """|H_2n| = J (J/2h)^(2n-1) n / (n!)²; underflows to 0 quietly."""
    lg = hopping_matrix_element_log(n, h, J)
    try:
        return math.exp(lg)
    except OverflowError:
        raise InvalidArgumentError("matrix element overflows a float")


def hopping_log_stirling(n, h, J=1.0):
    """Stirling form of log |H_2n|; only for cross-checking the argmax."""
    n = int(n)
    if n < 1:
        raise InvalidArgumentError("meson length must be >= 1")
    if h <= 0 or J <= 0:
        raise InvalidArgumentError("couplings must be positive")
    log_fact = n * math.log(n) - n + 0.5 * math.log(2.0 * math.pi * n)
    return (math.log(J) + (2 * n - 1) * (math.log(J) - math.log(2.0 * h))
            + math.log(n) - 2.0 * log_fact)


@dataclass(frozen=True)
class PeakLength:
    real: float
    argmax: int


def peak_meson_length(h, J=1.0):
    """Meson length where |H_2n| peaks.

    `real` is the stationary point J/(h e) of the Stirling form; `argmax`
    is the exact integer maximizer of hopping_matrix_element.
    """
    if h <= 0 or J <= 0:
        raise InvalidArgumentError("couplings must be positive")
    real = J / (h * math.e)
    best = 1
    best_lg = hopping_matrix_element_log(1, h, J)
    for n in range(2, MAX_HOPPING_ORDER + 1):
        lg = hopping_matrix_element_log(n, h, J)
        if lg > best_lg:
            best, best_lg = n, lg
        elif n > real + 2:
            break  # strictly decreasing past the peak
    return PeakLength(real=real, argmax=best)


def bessel_limit_eigenvector(n, k, h, J=1.0, r_max=50):
    """Large-h/J eigenstate profile gamma_r = J_{r-n}(2 J cos(k/2)/h).

    Normalized over r = 1..r_max. The wall at r = 0 is ignored by this
    limit form, which is what makes it a useful oracle: overlap with the
    exact tridiagonal eigenvector measures how deep into the large-h
    regime the parameters sit.
    """
    n = int(n)
    if n < 1:
        raise InvalidArgumentError("level index must be >= 1")
    if h <= 0:
        raise InvalidArgumentError("h must be positive")
    r_max = int(r_max)
    if r_max < n:
        raise InvalidArgumentError("r_max must reach the peak at r = n")
    x = 2.0 * J * math.cos(k / 2.0) / h
    prof = np.array([bessel_j(r - n, x) for r in range(1, r_max + 1)])
    norm = np.linalg.norm(prof)
    if norm == 0.0:
        raise InvalidArgumentError("profile vanished; r_max too small")
    return prof / norm


_DISPATCH = {
    "quantized-energy": (
        "large-h", lambda p: quantized_energy_large_h(p["n"], p["h"])),
    "airy-energy": (
        "small-h", lambda p: airy_energy(p["n"], p.get("k", 0.0), p["h"],
                                         p.get("J", 1.0))),
    "airy-zero": ("exact", lambda p: airy_zero(p["n"])),
    "theta-energy": (
        "exact", lambda p: theta_energy(p["theta"], p["h"], p.get("J", 1.0))),
    "breathing-amplitude": (
        "large-h", lambda p: breathing_amplitude(p["t"], p["h"],
                                                 p.get("J", 1.0))),
    "ravg-large-h": (
        "large-h", lambda p: ravg_large_h(p["t"], p["h"], p.get("J", 1.0))),
    "hopping-element": (
        "large-h", lambda p: hopping_matrix_element(p["n"], p["h"],
                                                    p.get("J", 1.0))),
    "peak-length": ("exact", lambda p: peak_meson_length(p["h"],
                                                         p.get("J", 1.0)).real),
}


def evaluate(quantity, params):
    """Name-indexed access to the closed forms (CLI hook)."""
    try:
        regime, fn = _DISPATCH[quantity]
    except KeyError:
        raise InvalidArgumentError(f"unknown quantity {quantity!r}") from None
    return LimitPrediction(quantity=quantity, value=float(fn(params)),
                           regime=regime)
