import io
import math

import numpy as np
import pytest

from mesondyn.basis import build_basis, links_from_positions
from mesondyn.dynamics import (
    WaveState,
    initial_theta_state,
    occupation_grid,
    state_at,
)
from mesondyn.errors import CapacityError, InvalidArgumentError
from mesondyn.linalg import eig_symmetric
from mesondyn.spinmap import (
    SpinSnapshot,
    SpinStateVector,
    TROTTER_MAX_SITES,
    domain_wall_counts,
    embed_sector_state,
    project_to_sector,
    sample_snapshots,
    sector_spin_hamiltonian,
    sector_to_snapshot_distribution,
    trotter_evolve_spin,
    write_snapshots,
)
from mesondyn.hamiltonian import build_sector_hamiltonian


def uniform_state(basis):
    dim = len(basis)
    return WaveState(np.full(dim, 1.0 / math.sqrt(dim), dtype=complex), basis)


def test_snapshot_walls_and_coordinates():
    snap = SpinSnapshot((-1, -1, 1, 1, -1, -1, -1))
    assert snap.walls == (3, 5)
    assert snap.r == 2
    assert snap.c == 4.0
    assert snap.as_text() == "dduuddd"

    tight = SpinSnapshot((1, -1, -1))
    assert tight.walls == (1, 2)
    assert tight.r == 1


def test_snapshot_rejects_non_single_block():
    with pytest.raises(InvalidArgumentError):
        SpinSnapshot((-1, -1, -1))
    with pytest.raises(InvalidArgumentError):
        SpinSnapshot((1, -1, 1))
    with pytest.raises(InvalidArgumentError):
        SpinSnapshot((1, 0, 1))


def test_distribution_matches_state_and_basis():
    basis = build_basis(8)
    psi = uniform_state(basis)
    dist = sector_to_snapshot_distribution(psi)
    assert len(dist) == len(basis)
    np.testing.assert_allclose(dist.probabilities,
                               np.abs(psi.amplitudes) ** 2, atol=1e-15)
    for index in (0, 5, len(basis) - 1):
        snap = dist.snapshot(index)
        expect = links_from_positions(int(basis.i1[index]),
                                      int(basis.i2[index]), basis.L)
        assert snap.spins == tuple(int(s) for s in expect.spins)
        assert snap.r == int(basis.r[index])

    with pytest.raises(InvalidArgumentError):
        sector_to_snapshot_distribution(psi.amplitudes)


def test_distribution_r_marginal_agrees_with_occupation_grid():
    basis = build_basis(10)
    rng = np.random.default_rng(7)
    amps = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
    amps /= np.linalg.norm(amps)
    psi = WaveState(amps, basis)
    dist = sector_to_snapshot_distribution(psi)
    np.testing.assert_allclose(dist.r_marginal(),
                               occupation_grid(psi).r_marginal(), atol=1e-15)


def test_sampling_is_deterministic_and_consistent():
    basis = build_basis(10)
    psi = uniform_state(basis)
    dist = sector_to_snapshot_distribution(psi)

    first = sample_snapshots(dist, 20000, seed=42)
    again = sample_snapshots(dist, 20000, seed=42)
    np.testing.assert_array_equal(first.indices, again.indices)
    other = sample_snapshots(dist, 20000, seed=43)
    assert not np.array_equal(first.indices, other.indices)

    exact_r = float((dist.probabilities * basis.r).sum())
    assert first.r_stderr > 0.0
    assert abs(first.r_avg_hat - exact_r) < 5.0 * first.r_stderr
    assert first.count == 20000

    with pytest.raises(InvalidArgumentError):
        sample_snapshots(dist, 0, seed=1)


def test_single_configuration_sampling_is_noise_free():
    basis = build_basis(8)
    amps = np.zeros(len(basis), dtype=complex)
    target = basis.index_of_positions(5, 4)
    amps[target] = 1.0
    dist = sector_to_snapshot_distribution(WaveState(amps, basis))
    result = sample_snapshots(dist, 500, seed=9)
    assert set(result.indices.tolist()) == {target}
    assert result.r_avg_hat == 1.0
    assert result.r_stderr == 0.0
    assert result.c_s_hat == 0.0


def test_snapshot_stream_roundtrip():
    basis = build_basis(8)
    psi = uniform_state(basis)
    dist = sector_to_snapshot_distribution(psi)
    result = sample_snapshots(dist, 64, seed=5)

    buf = io.StringIO()
    write_snapshots(buf, result, meta={"h_over_J": 1.1})
    lines = buf.getvalue().splitlines()

    header = {}
    body = []
    for line in lines:
        if line.startswith("# "):
            key, _, value = line[2:].partition(" = ")
            header[key] = value
        else:
            body.append(line)
    assert header["L"] == "8"
    assert header["h_over_J"] == "1.1"
    assert header["seed"] == "5"
    assert header["count"] == "64"
    assert len(body) == 64
    for line, index in zip(body, result.indices):
        assert len(line) == basis.L - 1
        assert set(line) <= {"u", "d"}
        snap = SpinSnapshot(tuple(1 if ch == "u" else -1 for ch in line))
        assert snap.r == int(basis.r[index])
        assert snap.walls == (int(basis.i2[index]), int(basis.i1[index]))


def test_domain_wall_counts_small_register():
    # L = 3: two links, virtual down spins on both edges
    counts = domain_wall_counts(3)
    assert counts.tolist() == [0, 2, 2, 2]

    counts5 = domain_wall_counts(5)
    assert counts5[0b0000] == 0
    assert counts5[0b0110] == 2
    assert counts5[0b1111] == 2
    assert counts5[0b1010] == 4
    assert counts5[0b1001] == 4

    basis = build_basis(9)
    conf_counts = domain_wall_counts(9)
    for s in range(len(basis)):
        spins = links_from_positions(int(basis.i1[s]), int(basis.i2[s]),
                                     9).spins
        conf = sum(1 << j for j, sp in enumerate(spins) if sp == 1)
        assert conf_counts[conf] == 2


def test_embed_project_roundtrip():
    basis = build_basis(10)
    psi = initial_theta_state(basis, 3.0 * math.pi / 4.0)
    register = embed_sector_state(psi)
    back = project_to_sector(register, basis)
    np.testing.assert_allclose(back, psi.amplitudes, atol=1e-15)

    big = build_basis(16)
    with pytest.raises(CapacityError):
        embed_sector_state(initial_theta_state(big, 0.0))


def test_register_state_rejects_sector_leakage():
    L = 5
    amps = np.zeros(1 << (L - 1), dtype=complex)
    amps[0b1010] = 1.0  # four walls
    with pytest.raises(InvalidArgumentError):
        SpinStateVector(amps, L)
    with pytest.raises(InvalidArgumentError):
        SpinStateVector(np.zeros(1 << (L - 1), dtype=complex), L)


def test_spin_sector_hamiltonian_matches_masked_boson_operator():
    L, J, h = 6, 1.0, 0.7
    basis = build_basis(L)
    boson = build_sector_hamiltonian(basis, J, h).to_dense()
    spin = sector_spin_hamiltonian(basis, J, h).to_dense()

    expected = boson - h * (L - 1) * np.eye(len(basis))
    spins = [links_from_positions(int(basis.i1[s]), int(basis.i2[s]), L).spins
             for s in range(len(basis))]
    for s in range(len(basis)):
        for t in range(s + 1, len(basis)):
            if boson[s, t] == 0.0:
                continue
            flipped = np.flatnonzero(spins[s] != spins[t])
            assert len(flipped) == 1
            link = int(flipped[0]) + 1
            if link in (1, L - 1):
                expected[s, t] = 0.0
                expected[t, s] = 0.0
    np.testing.assert_allclose(spin, expected, atol=1e-14)


def test_trotter_error_scales_quadratically():
    L, J, h, theta = 8, 1.0, 1.1, 0.0
    duration = 2.0
    basis = build_basis(L)
    spectrum = eig_symmetric(sector_spin_hamiltonian(basis, J, h))
    psi0 = initial_theta_state(basis, theta)
    exact = state_at(spectrum, psi0, duration).amplitudes

    errors = []
    for dt in (0.1, 0.05):
        steps = round(duration / dt)
        trajectory = trotter_evolve_spin(L, J, h, theta, dt, steps)
        final = project_to_sector(trajectory.final, basis)
        errors.append(float(np.linalg.norm(final - exact)))
    ratio = errors[0] / errors[1]
    assert 3.0 < ratio < 5.0


def test_trotter_stays_in_sector_and_records():
    trajectory = trotter_evolve_spin(6, 1.0, 1.5, math.pi / 8.0,
                                     dt=0.05, steps=40, record_every=10)
    np.testing.assert_allclose(trajectory.times, [0.0, 0.5, 1.0, 1.5, 2.0])
    assert len(trajectory.states) == 5
    for state in trajectory.states:
        # construction re-validates norm and sector support
        assert abs(np.linalg.norm(state.amplitudes) - 1.0) < 1e-10

    still = trotter_evolve_spin(6, 1.0, 1.5, 0.0, dt=0.05, steps=0)
    assert len(still.states) == 1
    assert still.times.tolist() == [0.0]


def test_trotter_capacity_and_argument_gates():
    with pytest.raises(CapacityError):
        trotter_evolve_spin(TROTTER_MAX_SITES + 2, 1.0, 1.0, 0.0, 0.1, 10)
    with pytest.raises(InvalidArgumentError):
        trotter_evolve_spin(8, 1.0, 1.0, 0.0, -0.1, 10)
    with pytest.raises(InvalidArgumentError):
        trotter_evolve_spin(8, 1.0, 1.0, 0.0, 0.1, -1)
