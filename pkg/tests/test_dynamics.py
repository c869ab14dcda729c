import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mesondyn.basis import build_basis
from mesondyn.dynamics import (
    WaveState,
    evolve_spectral,
    initial_theta_state,
    occupation_grid,
    propagate_states,
    rk4_evolve,
    state_at,
)
from mesondyn.errors import InvalidArgumentError
from mesondyn.hamiltonian import build_sector_hamiltonian
from mesondyn.linalg import eig_symmetric


def spectrum_for(L, J=1.0, h=1.1):
    basis = build_basis(L)
    op = build_sector_hamiltonian(basis, J, h)
    return basis, op, eig_symmetric(op)


def test_theta_state_components():
    basis = build_basis(8)
    psi = initial_theta_state(basis, math.pi / 3)
    nz = np.flatnonzero(psi.amplitudes)
    assert len(nz) == 2
    i_small = basis.index_of_rc(1, 9)
    i_large = basis.index_of_rc(2, 10)
    assert psi.amplitudes[i_small] == pytest.approx(math.cos(math.pi / 6))
    assert psi.amplitudes[i_large] == pytest.approx(-math.sin(math.pi / 6))
    assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0)


def test_theta_endpoints_are_single_mesons():
    basis = build_basis(10)
    flat = initial_theta_state(basis, 0.0)
    assert np.flatnonzero(flat.amplitudes).tolist() == [
        basis.index_of_rc(1, 11)]
    tall = initial_theta_state(basis, math.pi)
    assert np.flatnonzero(np.abs(tall.amplitudes) > 1e-15).tolist() == [
        basis.index_of_rc(2, 12)]


def test_theta_state_validation():
    with pytest.raises(InvalidArgumentError):
        initial_theta_state(build_basis(7), 0.0)
    with pytest.raises(InvalidArgumentError):
        initial_theta_state(build_basis(8), -0.1)
    with pytest.raises(InvalidArgumentError):
        initial_theta_state(build_basis(8), 3.5)


def test_wave_state_validation():
    basis = build_basis(6)
    good = np.zeros(len(basis), dtype=np.complex128)
    good[0] = 1.0
    WaveState(good, basis)
    with pytest.raises(InvalidArgumentError):
        WaveState(good * 0.5, basis)
    with pytest.raises(InvalidArgumentError):
        WaveState(good[:-1], basis)


def test_propagation_validation():
    basis, _, spectrum = spectrum_for(6)
    psi = initial_theta_state(basis, 0.0)
    with pytest.raises(InvalidArgumentError):
        propagate_states(spectrum, psi, np.array([0.0, -1.0]))
    with pytest.raises(InvalidArgumentError):
        propagate_states(spectrum, psi, np.array([1.0, 0.5]))
    other = spectrum_for(8)[2]
    with pytest.raises(InvalidArgumentError):
        propagate_states(other, psi, np.array([0.0]))


def test_frozen_dynamics_without_hopping():
    basis, op, spectrum = spectrum_for(8, J=0.0, h=1.3)
    psi = initial_theta_state(basis, math.pi / 2)
    times = np.linspace(0.0, 5.0, 60)
    series = evolve_spectral(spectrum, psi, times, hamiltonian=op)
    assert np.allclose(series.r_avg, series.r_avg[0], atol=1e-12)
    assert np.allclose(series.density, series.density[0], atol=1e-12)
    # a single occupied configuration only picks up a global phase
    flat = initial_theta_state(basis, 0.0)
    final = state_at(spectrum, flat, 5.0)
    overlap = abs(np.vdot(flat.amplitudes, final.amplitudes))
    assert overlap == pytest.approx(1.0, abs=1e-12)


def test_norm_and_energy_conserved():
    basis, op, spectrum = spectrum_for(12)
    psi = initial_theta_state(basis, 3 * math.pi / 8)
    times = np.linspace(0.0, 8.0, 120)
    series = evolve_spectral(spectrum, psi, times, hamiltonian=op)
    assert series.norm_error.max() < 1e-10
    assert np.abs(series.energy - series.energy[0]).max() < 1e-10


def test_energy_paths_agree():
    basis, op, spectrum = spectrum_for(10)
    psi = initial_theta_state(basis, 1.0)
    times = np.linspace(0.0, 4.0, 50)
    honest = evolve_spectral(spectrum, psi, times, hamiltonian=op)
    cheap = evolve_spectral(spectrum, psi, times)
    assert np.allclose(honest.energy, cheap.energy, atol=1e-10)


def test_site_density_accounts_for_both_bosons():
    basis, op, spectrum = spectrum_for(10)
    psi = initial_theta_state(basis, 2.0)
    series = evolve_spectral(spectrum, psi, np.linspace(0.0, 6.0, 40))
    assert np.allclose(series.density.sum(axis=1), 2.0, atol=1e-10)
    assert np.allclose(
        series.left_weight + series.right_weight, 2.0, atol=1e-10)


def test_central_start_stays_left_right_symmetric():
    # reflection about the chain center commutes with the evolution
    basis, op, spectrum = spectrum_for(12)
    psi = initial_theta_state(basis, 0.0)
    series = evolve_spectral(spectrum, psi, np.linspace(0.0, 7.0, 50))
    assert np.abs(series.left_weight - series.right_weight).max() < 1e-10


def test_occupation_grid_matches_amplitudes():
    basis, op, spectrum = spectrum_for(9 + 1)
    psi = state_at(spectrum, initial_theta_state(basis, 1.2), 2.5)
    grid = occupation_grid(psi)
    assert grid.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
    r_avg = float(grid.r_values @ grid.r_marginal())
    assert r_avg == pytest.approx(
        float(basis.r @ (np.abs(psi.amplitudes) ** 2)), abs=1e-12)


def test_series_occupation_slices_are_grids():
    basis, op, spectrum = spectrum_for(8)
    psi = initial_theta_state(basis, 0.7)
    times = np.linspace(0.0, 3.0, 7)
    series = evolve_spectral(spectrum, psi, times, with_occupation=True)
    assert series.occupation.shape == (7, 7, 13)
    assert np.allclose(series.occupation.sum(axis=(1, 2)), 1.0, atol=1e-10)
    direct = occupation_grid(state_at(spectrum, psi, float(times[3])))
    assert np.allclose(series.occupation[3], direct.probabilities, atol=1e-10)


def test_reflected_flag_is_monotone():
    basis, op, spectrum = spectrum_for(14, h=0.3)
    psi = initial_theta_state(basis, 0.0)
    series = evolve_spectral(spectrum, psi, np.linspace(0.0, 30.0, 200))
    flags = series.reflected.astype(int)
    assert np.all(np.diff(flags) >= 0)
    assert series.reflected.any()
    assert math.isfinite(series.guard_time)


def test_rk4_matches_spectral_evolution():
    basis, op, spectrum = spectrum_for(12)
    psi = initial_theta_state(basis, math.pi / 4)
    t = 3.0
    direct = rk4_evolve(op, psi.amplitudes, t, steps=6000)
    reference = propagate_states(spectrum, psi, np.array([t]))[:, 0]
    assert np.abs(direct - reference).max() < 1e-9


def test_rk4_accepts_dense_matrix():
    basis, op, spectrum = spectrum_for(6)
    psi = initial_theta_state(basis, 0.0)
    a = op.to_dense()
    out_op = rk4_evolve(op, psi.amplitudes, 1.0, steps=400)
    out_arr = rk4_evolve(a, psi.amplitudes, 1.0, steps=400)
    assert np.allclose(out_op, out_arr, atol=1e-13)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_random_states_evolve_unitarily(seed):
    basis, op, spectrum = spectrum_for(8)
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(
        len(basis))
    raw /= np.linalg.norm(raw)
    psi = WaveState(raw, basis)
    series = evolve_spectral(spectrum, psi, np.linspace(0.0, 2.0, 55))
    assert series.norm_error.max() < 1e-10
    assert series.r_avg.min() >= 1.0 - 1e-9
    assert series.c_s.min() >= 0.0
