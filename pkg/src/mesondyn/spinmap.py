"""Dual link-spin picture: snapshots, Born sampling, and a Trotterized
statevector evolution of the pure spin model.

A two-boson basis state maps to a single contiguous block of raised link
spins (two domain walls). Measuring every link spin therefore samples the
joint (r, c) distribution directly; that protocol is emulated here with a
counter-based generator so runs are reproducible across platforms.

The Trotter path evolves the full 2^(L-1) spin register under the dual
Hamiltonian: constrained three-spin flip terms (strength J) plus a
longitudinal field (strength h), split symmetrically. It never references
the eigensolver, which makes it an independent oracle for the sector
dynamics at small L.
"""
from dataclasses import dataclass
import math

import numpy as np

from .basis import build_basis, links_from_positions
from .dynamics import WaveState, initial_theta_state
from .errors import CapacityError, InvalidArgumentError
from .hamiltonian import SparseSymmetricOperator

__all__ = [
    "SpinSnapshot",
    "SnapshotDistribution",
    "SampleResult",
    "SpinStateVector",
    "SpinTrajectory",
    "TROTTER_MAX_SITES",
    "sector_to_snapshot_distribution",
    "sample_snapshots",
    "write_snapshots",
    "domain_wall_counts",
    "embed_sector_state",
    "project_to_sector",
    "sector_spin_hamiltonian",
    "trotter_evolve_spin",
]

TROTTER_MAX_SITES = 14


@dataclass(frozen=True)
class SpinSnapshot:
    """One measured link-spin configuration with its domain-wall pair."""

    spins: tuple

    def __post_init__(self):
        spins = tuple(int(s) for s in self.spins)
        if any(s not in (-1, 1) for s in spins):
            raise InvalidArgumentError("spins must be -1 or +1")
        up = [j for j, s in enumerate(spins) if s == 1]
        if not up or up[-1] - up[0] != len(up) - 1:
            raise InvalidArgumentError(
                "snapshot must contain exactly one block of raised spins"
            )
        object.__setattr__(self, "spins", spins)

    @property
    def walls(self):
        """(i2, i1): boson positions bounding the raised block."""
        up = [j for j, s in enumerate(self.spins) if s == 1]
        return up[0] + 1, up[-1] + 2

    @property
    def r(self):
        i2, i1 = self.walls
        return i1 - i2

    @property
    def c(self):
        i2, i1 = self.walls
        return (i1 + i2) / 2.0

    def as_text(self):
        return "".join("u" if s == 1 else "d" for s in self.spins)


class SnapshotDistribution:
    """Born-rule probability table over snapshots, aligned with a basis."""

    __slots__ = ("basis", "probabilities")

    def __init__(self, basis, probabilities):
        probabilities = np.ascontiguousarray(probabilities, dtype=np.float64)
        if probabilities.shape != (len(basis),):
            raise InvalidArgumentError("probability vector does not fit basis")
        if np.any(probabilities < -1e-15):
            raise InvalidArgumentError("negative probability")
        total = probabilities.sum()
        if abs(total - 1.0) > 1e-8:
            raise InvalidArgumentError(f"probabilities sum to {total!r}")
        self.basis = basis
        self.probabilities = np.maximum(probabilities, 0.0)

    def __len__(self):
        return len(self.probabilities)

    def snapshot(self, index):
        i1 = int(self.basis.i1[index])
        i2 = int(self.basis.i2[index])
        config = links_from_positions(i1, i2, self.basis.L)
        return SpinSnapshot(tuple(int(s) for s in config.spins))

    def r_marginal(self):
        """P(r) for r = 1..L-1, same marginal the dynamics module uses."""
        out = np.zeros(self.basis.L - 1)
        np.add.at(out, self.basis.r - 1, self.probabilities)
        return out


def sector_to_snapshot_distribution(psi):
    """Measurement distribution of a sector state: P(i2,i1) = |g|^2."""
    if not isinstance(psi, WaveState):
        raise InvalidArgumentError("expected a WaveState")
    return SnapshotDistribution(psi.basis, np.abs(psi.amplitudes) ** 2)


@dataclass(frozen=True)
class SampleResult:
    """Sampled snapshot indices plus the standard estimators."""

    distribution: SnapshotDistribution
    indices: np.ndarray
    seed: int
    r_avg_hat: float
    c_s_hat: float
    r_stderr: float

    @property
    def count(self):
        return len(self.indices)

    def snapshots(self):
        for i in self.indices:
            yield self.distribution.snapshot(int(i))


def sample_snapshots(dist, count, seed):
    """Draw `count` snapshots reproducibly with a Philox counter generator.

    Returns the sampled indices and the plug-in estimators: r_avg_hat is
    the sample mean of r, c_s_hat the sample standard deviation of c.
    r_stderr estimates the standard error of r_avg_hat and shrinks as
    count^(-1/2).
    """
    count = int(count)
    if count < 1:
        raise InvalidArgumentError("count must be >= 1")
    rng = np.random.Generator(np.random.Philox(int(seed)))
    cum = np.cumsum(dist.probabilities)
    cum[-1] = max(cum[-1], 1.0)
    draws = rng.random(count)
    indices = np.searchsorted(cum, draws, side="right")
    indices = np.minimum(indices, len(cum) - 1).astype(np.int64)

    r = dist.basis.r[indices].astype(np.float64)
    c = dist.basis.cc[indices].astype(np.float64) / 2.0
    r_avg_hat = float(r.mean())
    c_s_hat = float(c.std())
    spread = float(r.std(ddof=1)) if count > 1 else 0.0
    return SampleResult(
        distribution=dist, indices=indices, seed=int(seed),
        r_avg_hat=r_avg_hat, c_s_hat=c_s_hat,
        r_stderr=spread / math.sqrt(count),
    )


def write_snapshots(f, result, meta=None):
    """Stream snapshots as one u/d line each, after a key = value header."""
    basis = result.distribution.basis
    header = {"L": basis.L}
    header.update(meta or {})
    header["seed"] = result.seed
    header["count"] = result.count
    for key, value in header.items():
        f.write(f"# {key} = {value}\n")
    cache = {}
    for i in result.indices:
        i = int(i)
        line = cache.get(i)
        if line is None:
            line = result.distribution.snapshot(i).as_text() + "\n"
            cache[i] = line
        f.write(line)


# --- Trotterized statevector evolution -------------------------------

_WALL_COUNT_CACHE = {}


def domain_wall_counts(L):
    """Wall count of every link configuration, edges padded with down spins."""
    cached = _WALL_COUNT_CACHE.get(L)
    if cached is not None:
        return cached
    nl = L - 1
    idx = np.arange(1 << nl)
    bits = (idx[:, None] >> np.arange(nl)[None, :]) & 1
    padded = np.concatenate(
        [np.zeros((len(idx), 1), dtype=np.int64), bits,
         np.zeros((len(idx), 1), dtype=np.int64)], axis=1)
    counts = (padded[:, 1:] != padded[:, :-1]).sum(axis=1)
    counts.setflags(write=False)
    _WALL_COUNT_CACHE[L] = counts
    return counts


@dataclass(frozen=True)
class SpinStateVector:
    """Full register state; support must stay in the two-wall sector."""

    amplitudes: np.ndarray
    L: int

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << (self.L - 1),):
            raise InvalidArgumentError("amplitude count must be 2^(L-1)")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise InvalidArgumentError(f"norm {norm!r} is not 1")
        stray = np.abs(amps[domain_wall_counts(self.L) != 2]).max(initial=0.0)
        if stray > 1e-10:
            raise InvalidArgumentError(
                "support leaked outside the two-domain-wall sector"
            )
        object.__setattr__(self, "amplitudes", amps)


@dataclass(frozen=True)
class SpinTrajectory:
    times: np.ndarray
    states: list

    @property
    def final(self):
        return self.states[-1]


def _basis_config_index(i1, i2):
    # block of raised links j = i2..i1-1, bit j-1 in the register
    conf = 0
    for j in range(i2, i1):
        conf |= 1 << (j - 1)
    return conf


def embed_sector_state(psi):
    """Lift a sector WaveState into the full spin register."""
    L = psi.basis.L
    if L > TROTTER_MAX_SITES:
        raise CapacityError(
            f"full register needs L <= {TROTTER_MAX_SITES} (got L={L})"
        )
    amps = np.zeros(1 << (L - 1), dtype=np.complex128)
    for s, a in enumerate(psi.amplitudes):
        if a != 0:
            amps[_basis_config_index(int(psi.basis.i1[s]),
                                     int(psi.basis.i2[s]))] = a
    return SpinStateVector(amps, L)


def project_to_sector(spin_state, basis):
    """Sector amplitudes of a register state (in basis order)."""
    if basis.L != spin_state.L:
        raise InvalidArgumentError("basis and register sizes differ")
    out = np.empty(len(basis), dtype=np.complex128)
    for s in range(len(basis)):
        out[s] = spin_state.amplitudes[
            _basis_config_index(int(basis.i1[s]), int(basis.i2[s]))]
    return out


def sector_spin_hamiltonian(basis, J, h):
    """Two-wall sector block of the dual spin Hamiltonian.

    Differs from the sector Hamiltonian of the boson chain in two ways
    fixed by the spin model itself: the field term contributes
    h(2r - (L-1)) rather than 2hr (a constant shift), and hops that
    would toggle one of the two outermost links are absent because the
    constrained-flip term needs both neighbor links present.
    """
    L = basis.L
    nl = L - 1
    rows, cols, values = [], [], []
    for s in range(len(basis)):
        r = int(basis.r[s])
        i1 = int(basis.i1[s])
        i2 = int(basis.i2[s])
        rows.append(s)
        cols.append(s)
        values.append(h * (2.0 * r - nl))
        for j1, j2, link in ((i1 + 1, i2, i1), (i1 - 1, i2, i1 - 1),
                             (i1, i2 + 1, i2), (i1, i2 - 1, i2 - 1)):
            if 1 <= j2 < j1 <= L and 2 <= link <= nl - 1:
                t = basis.index_of_positions(j1, j2)
                if t > s:
                    rows.append(s)
                    cols.append(t)
                    values.append(-J)
    return SparseSymmetricOperator(len(basis), rows, cols, values)


class _TrotterKernel:
    """Precomputed gate index sets for one register size."""

    def __init__(self, L, J, h):
        nl = L - 1
        dim = 1 << nl
        idx = np.arange(dim)
        bits = ((idx[:, None] >> np.arange(nl)[None, :]) & 1).astype(np.int8)
        zvals = 2 * bits - 1
        self.field = h * zvals.sum(axis=1).astype(np.float64)
        self.J = J
        self.even = []
        self.odd = []
        # interior links only: the flip needs neighbor links on both sides
        for j in range(1, nl - 1):
            anti = zvals[:, j - 1] != zvals[:, j + 1]
            lo = np.flatnonzero(anti & (bits[:, j] == 0))
            hi = lo | (1 << j)
            (self.even if j % 2 == 0 else self.odd).append((lo, hi))

    def flips(self, psi, group, angle):
        c = math.cos(angle)
        s = 1j * math.sin(angle)
        for lo, hi in group:
            a0 = psi[lo]
            a1 = psi[hi]
            psi[lo] = c * a0 + s * a1
            psi[hi] = s * a0 + c * a1

    def step(self, psi, dt):
        half_field = np.exp(-1j * (dt / 2.0) * self.field)
        psi *= half_field
        self.flips(psi, self.even, self.J * dt / 2.0)
        self.flips(psi, self.odd, self.J * dt)
        self.flips(psi, self.even, self.J * dt / 2.0)
        psi *= half_field


def trotter_evolve_spin(L, J, h, theta, dt, steps, record_every=None):
    """Strang-split register evolution from the tilted initial state.

    Field half-step, constrained flips (even links half, odd links full,
    even links half), field half-step; every substep is unitary and
    preserves the domain-wall count exactly, so the global error is
    O(dt^2) while the state never leaves the two-wall sector.

    record_every=None keeps only the initial and final states.
    """
    L = int(L)
    if L > TROTTER_MAX_SITES:
        raise CapacityError(
            f"register evolution supports L <= {TROTTER_MAX_SITES} sites"
        )
    if dt <= 0:
        raise InvalidArgumentError("dt must be positive")
    steps = int(steps)
    if steps < 0:
        raise InvalidArgumentError("steps must be >= 0")

    basis = build_basis(L)
    initial = embed_sector_state(initial_theta_state(basis, theta))
    kernel = _TrotterKernel(L, J, h)

    psi = initial.amplitudes.copy()
    times = [0.0]
    states = [initial]
    for step in range(1, steps + 1):
        kernel.step(psi, dt)
        if record_every and step % record_every == 0 and step != steps:
            times.append(step * dt)
            states.append(SpinStateVector(psi.copy(), L))
    if steps:
        times.append(steps * dt)
        states.append(SpinStateVector(psi.copy(), L))
    return SpinTrajectory(np.array(times), states)
