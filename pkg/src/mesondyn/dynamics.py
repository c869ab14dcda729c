"""State preparation, time evolution, and observables for the two-particle
sector.

Evolution is spectral (exact given an eigendecomposition); a fixed-step
Runge-Kutta integrator is provided as an independent oracle for testing the
spectral path. Observables are reconstructed from the amplitudes at each
requested time.
"""
from dataclasses import dataclass
import math

import numpy as np

from .basis import TwoParticleBasis
from .errors import InvalidArgumentError
from .linalg import Spectrum, spectral_propagate

__all__ = [
    "WaveState",
    "ObservableSeries",
    "OccupationGrid",
    "initial_theta_state",
    "evolve_spectral",
    "propagate_states",
    "state_at",
    "rk4_evolve",
    "occupation_grid",
]

NORM_TOL = 1e-10
EDGE_GUARD_SITES = 5
EDGE_GUARD_LEVEL = 1e-3


@dataclass(frozen=True)
class WaveState:
    """Normalized amplitudes over a TwoParticleBasis."""

    amplitudes: np.ndarray
    basis: TwoParticleBasis

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (len(self.basis),):
            raise InvalidArgumentError(
                f"amplitude vector has shape {amps.shape}, "
                f"basis needs ({len(self.basis)},)"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidArgumentError(f"state norm {norm!r} is not 1")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dimension(self):
        return len(self.basis)


@dataclass(frozen=True)
class OccupationGrid:
    """Joint probability over meson size r and center position c.

    Rows run over r = 1..L-1, columns over c = cc/2 for cc = 3..2L-1.
    Half of the cells are parity-forbidden (cc and r must have equal
    parity) and stay exactly zero.
    """

    r_values: np.ndarray
    c_values: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        if self.probabilities.shape != (len(self.r_values), len(self.c_values)):
            raise InvalidArgumentError("grid shape does not match axes")
        total = float(self.probabilities.sum())
        if abs(total - 1.0) > 1e-8:
            raise InvalidArgumentError(f"grid mass {total!r} is not 1")

    def r_marginal(self):
        return self.probabilities.sum(axis=1)

    def c_marginal(self):
        return self.probabilities.sum(axis=0)


@dataclass(frozen=True)
class ObservableSeries:
    """Per-time observables along a trajectory.

    density rows hold the site-occupation profile (sums to 2, one per
    boson). reflected marks every time at or after the first moment the
    outer EDGE_GUARD_SITES sites on either end carry more than
    EDGE_GUARD_LEVEL of density; long-time fits should exclude those.
    """

    times: np.ndarray
    r_avg: np.ndarray
    c_s: np.ndarray
    density: np.ndarray
    energy: np.ndarray
    norm_error: np.ndarray
    left_weight: np.ndarray
    right_weight: np.ndarray
    reflected: np.ndarray
    occupation: np.ndarray | None = None

    def __post_init__(self):
        nt = len(self.times)
        for name in ("r_avg", "c_s", "energy", "norm_error",
                     "left_weight", "right_weight", "reflected"):
            if len(getattr(self, name)) != nt:
                raise InvalidArgumentError(f"{name} length != times length")
        if self.density.shape[0] != nt:
            raise InvalidArgumentError("density rows != times length")
        sums = self.density.sum(axis=1)
        if nt and np.max(np.abs(sums - 2.0)) > 1e-8:
            raise InvalidArgumentError("density does not sum to 2 per time")
        if nt and np.min(self.c_s) < 0:
            raise InvalidArgumentError("negative center-of-mass spread")
        if self.occupation is not None:
            mass = self.occupation.reshape(nt, -1).sum(axis=1)
            if nt and np.max(np.abs(mass - 1.0)) > 1e-8:
                raise InvalidArgumentError("occupation grids do not sum to 1")

    @property
    def guard_time(self):
        """First reflection-flagged time, or +inf when none is flagged."""
        hit = np.flatnonzero(self.reflected)
        return float(self.times[hit[0]]) if len(hit) else math.inf


def initial_theta_state(basis, theta):
    """Gauge-tilted initial state: cos(θ/2)|r=1,cc=L+1> - sin(θ/2)|r=2,cc=L+2>.

    θ=0 is the single central r=1 meson; θ=π the pure r=2 meson. Requires
    even L so both referenced center coordinates exist on the lattice.
    """
    L = basis.L
    if L % 2:
        raise InvalidArgumentError("theta state needs even L")
    theta = float(theta)
    if not 0.0 <= theta <= math.pi:
        raise InvalidArgumentError("theta must lie in [0, pi]")
    amps = np.zeros(len(basis), dtype=np.complex128)
    amps[basis.index_of_rc(1, L + 1)] = math.cos(theta / 2)
    amps[basis.index_of_rc(2, L + 2)] = -math.sin(theta / 2)
    return WaveState(amps, basis)


def propagate_states(spectrum, psi0, times):
    """Amplitude columns V e^{-i Lambda t} V^T psi0, one per time."""
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or len(times) == 0:
        raise InvalidArgumentError("times must be a nonempty 1-d grid")
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise InvalidArgumentError("times must be nonnegative and ascending")
    if spectrum.dimension != psi0.dimension:
        raise InvalidArgumentError(
            f"spectrum dimension {spectrum.dimension} != state dimension "
            f"{psi0.dimension}"
        )
    return spectral_propagate(spectrum, psi0.amplitudes, times)


def state_at(spectrum, psi0, t):
    psi = propagate_states(spectrum, psi0, np.array([float(t)]))[:, 0]
    return WaveState(psi / np.linalg.norm(psi), psi0.basis)


def _site_density(basis, P):
    # P: (dim, nt) probabilities; returns (nt, L) site occupations
    L = basis.L
    dens = np.zeros((L + 1, P.shape[1]))
    np.add.at(dens, basis.i1, P)
    np.add.at(dens, basis.i2, P)
    return dens[1:].T


def evolve_spectral(spectrum, psi0, times, hamiltonian=None,
                    with_occupation=False):
    """Evolve psi0 over the time grid and assemble the observable series.

    When `hamiltonian` is given the energy column is recomputed per time
    from <psi|H|psi> (an honest consistency probe); otherwise it is the
    constant sum of |<v_i|psi0>|^2 E_i.
    """
    basis = psi0.basis
    psi_t = propagate_states(spectrum, psi0, times)
    times = np.asarray(times, dtype=np.float64)
    P = np.abs(psi_t) ** 2
    norms = np.sqrt(P.sum(axis=0))
    norm_error = np.abs(norms - 1.0)

    r = basis.r.astype(np.float64)
    c = basis.cc.astype(np.float64) / 2.0
    r_avg = r @ P
    c_mean = c @ P
    c_sq = (c * c) @ P
    c_s = np.sqrt(np.maximum(c_sq - c_mean**2, 0.0))

    density = _site_density(basis, P)
    L = basis.L
    half = L // 2
    left_weight = density[:, :half].sum(axis=1)
    right_weight = density[:, half:].sum(axis=1)

    edge = (density[:, :EDGE_GUARD_SITES].sum(axis=1)
            + density[:, L - EDGE_GUARD_SITES:].sum(axis=1))
    over = edge > EDGE_GUARD_LEVEL
    reflected = np.zeros(len(times), dtype=bool)
    hit = np.flatnonzero(over)
    if len(hit):
        reflected[hit[0]:] = True

    if hamiltonian is not None:
        hr = hamiltonian.matmat(np.ascontiguousarray(psi_t.real))
        hi = hamiltonian.matmat(np.ascontiguousarray(psi_t.imag))
        energy = np.sum(psi_t.real * hr + psi_t.imag * hi, axis=0)
    else:
        w = (spectrum.eigenvectors.T @ psi0.amplitudes.real
             + 1j * (spectrum.eigenvectors.T @ psi0.amplitudes.imag))
        energy = np.full(len(times), float(spectrum.eigenvalues @ np.abs(w) ** 2))

    occupation = None
    if with_occupation:
        occupation = np.zeros((len(times), L - 1, 2 * L - 3))
        rows = basis.r - 1
        cols = basis.cc - 3
        occupation[:, rows, cols] = P.T

    return ObservableSeries(
        times=times, r_avg=r_avg, c_s=c_s, density=density, energy=energy,
        norm_error=norm_error, left_weight=left_weight,
        right_weight=right_weight, reflected=reflected, occupation=occupation,
    )


def occupation_grid(psi):
    """Joint (r, c) probability grid of a single state."""
    basis = psi.basis
    L = basis.L
    grid = np.zeros((L - 1, 2 * L - 3))
    grid[basis.r - 1, basis.cc - 3] = np.abs(psi.amplitudes) ** 2
    r_values = np.arange(1, L)
    c_values = np.arange(3, 2 * L) / 2.0
    return OccupationGrid(r_values, c_values, grid)


def _matvec_of(op):
    if isinstance(op, np.ndarray):
        return lambda v: op @ v
    return op.matvec


def rk4_evolve(op, amplitudes, duration, steps):
    """Classic fixed-step 4th-order integration of i dψ/dt = H ψ.

    Independent of the spectral path on purpose: no eigendecomposition,
    no renormalization. Used as the dynamics oracle in tests.
    """
    if steps < 1:
        raise InvalidArgumentError("steps must be >= 1")
    matvec = _matvec_of(op)

    def f(v):
        return -1j * matvec(v)

    psi = np.array(amplitudes, dtype=np.complex128)
    dt = float(duration) / steps
    for _ in range(steps):
        k1 = f(psi)
        k2 = f(psi + 0.5 * dt * k1)
        k3 = f(psi + 0.5 * dt * k2)
        k4 = f(psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return psi
