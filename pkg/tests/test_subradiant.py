"""Collective modes, gate construction and decay-rate extraction."""

import numpy as np
import pytest

from wqed.basis import build_basis
from wqed.dynamics import Trajectory, evolve
from wqed.errors import InsufficientDataError, WindowTooShortError
from wqed.hamiltonian import assemble_hamiltonian, waveguide_block
from wqed.params import DriveSpec, PhysicalParams
from wqed.subradiant import (
    build_gate_state,
    decay_rate_from_trajectory,
    embed_gate,
    fit_scaling,
    momentum_centroid,
    single_excitation_eigenmodes,
)


def test_single_atom_mode():
    modes = single_excitation_eigenmodes(PhysicalParams(n_atoms=1, gamma_1d=0.8))
    assert len(modes) == 1
    assert modes[0].decay_rate == pytest.approx(0.8)


def test_two_atom_mirror_rates():
    modes = single_excitation_eigenmodes(PhysicalParams(n_atoms=2, gamma_1d=0.7, ka=np.pi))
    rates = sorted(m.decay_rate for m in modes)
    assert rates[0] == pytest.approx(0.0, abs=1e-12)
    assert rates[1] == pytest.approx(1.4)


def test_two_atom_quarter_wave_degenerate():
    modes = single_excitation_eigenmodes(PhysicalParams(n_atoms=2, gamma_1d=0.7, ka=np.pi / 2))
    for m in modes:
        assert m.decay_rate == pytest.approx(0.7, abs=1e-12)
    eigs = sorted((m.eigenvalue.real, m.eigenvalue.imag) for m in modes)
    assert eigs[0][0] == pytest.approx(-0.35)
    assert eigs[1][0] == pytest.approx(+0.35)
    assert eigs[0][1] == pytest.approx(-0.35)


def test_eigenmode_completeness():
    p = PhysicalParams(n_atoms=12, gamma_1d=0.9)
    modes = single_excitation_eigenmodes(p)
    h = waveguide_block(12, 0.9, p.phase_per_site)
    V = np.stack([m.vector for m in modes], axis=1)
    lam = np.array([m.eigenvalue for m in modes])
    recon = V @ np.diag(lam) @ np.linalg.inv(V)
    assert np.max(np.abs(recon - h)) < 1e-8


def test_degenerate_pair_and_centroids():
    p = PhysicalParams(n_atoms=60, gamma_1d=1.0)
    modes = single_excitation_eigenmodes(p)
    a, b = modes[0], modes[1]
    assert abs(a.decay_rate - b.decay_rate) <= 1e-6 * a.decay_rate
    cents = sorted(abs(m.k_centroid) for m in (a, b))
    assert cents[0] == pytest.approx(0.0, abs=2 * np.pi / 60 + 1e-9)
    assert cents[1] == pytest.approx(np.pi, abs=2 * np.pi / 60 + 1e-9)


def test_gate_state_single_atom():
    for kind in ("subradiant", "single-site"):
        g = build_gate_state(PhysicalParams(n_atoms=1, gamma_1d=1.0), kind)
        assert np.allclose(np.abs(g.amplitudes), [1.0])


def test_gate_state_profile():
    p = PhysicalParams(n_atoms=100, gamma_1d=1.0)
    g = build_gate_state(p, "subradiant")
    amps = np.abs(g.amplitudes)
    # smooth envelope, vanishing at the chain edges
    assert amps[0] < 0.1 * amps.max()
    assert amps[-1] < 0.1 * amps.max()
    assert abs(momentum_centroid(g.amplitudes)) == pytest.approx(np.pi, abs=2 * np.pi / 100)
    assert np.linalg.norm(g.amplitudes) == pytest.approx(1.0)


def test_gate_state_lives_in_storage_manifold():
    p = PhysicalParams(n_atoms=6, gamma_1d=1.0)
    basis = build_basis(6)
    psi = embed_gate(build_gate_state(p, "subradiant"), basis)
    sing = basis.singles_view(psi)
    assert np.all(sing[:, 0] == 0.0)
    assert np.linalg.norm(psi) == pytest.approx(1.0)


def test_single_site_gate():
    p = PhysicalParams(n_atoms=5, gamma_1d=1.0)
    g = build_gate_state(p, "single-site", site=2)
    assert g.amplitudes[1] == 1.0
    assert np.sum(np.abs(g.amplitudes)) == 1.0


def test_subradiant_rate_consistent_with_evolution():
    # eigenvalue decay rate vs trajectory 1/e time of the same state
    p = PhysicalParams(n_atoms=16, gamma_1d=1.0, gamma_prime=0.0)
    modes = single_excitation_eigenmodes(p)
    mode = modes[3]  # moderately subradiant: reachable window
    basis = build_basis(16, max_exc=1)
    psi0 = basis.embed_singles(e_amps=mode.vector)
    ham = assemble_hamiltonian(p, DriveSpec("cw", 0.0), basis)
    t_end = 3.0 / mode.decay_rate
    traj = evolve(ham, psi0, t_end, min(2e-3 * t_end, 0.02))
    rate = decay_rate_from_trajectory(traj)
    assert rate == pytest.approx(mode.decay_rate, rel=0.02)


def test_decay_rate_pure_exponential():
    t = np.linspace(0.0, 5.0, 501)
    traj = Trajectory(times=t, data={"p_e_tot": np.exp(-t), "p_s_tot": np.zeros_like(t), "norm_sq": np.exp(-t)}, dt=t[1])
    assert decay_rate_from_trajectory(traj) == pytest.approx(1.0, rel=1e-4)
    assert decay_rate_from_trajectory(traj, long_time=True) == pytest.approx(1.0, rel=1e-3)


def test_decay_rate_window_too_short():
    t = np.linspace(0.0, 0.2, 21)
    traj = Trajectory(times=t, data={"p_e_tot": np.exp(-t), "p_s_tot": np.zeros_like(t), "norm_sq": np.exp(-t)}, dt=t[1])
    with pytest.raises(WindowTooShortError):
        decay_rate_from_trajectory(traj)


def test_long_time_variant_skips_transient():
    t = np.linspace(0.0, 60.0, 6001)
    # fast transient on top of a slow tail
    pop = 0.5 * np.exp(-10 * t) + 0.5 * np.exp(-0.05 * t)
    traj = Trajectory(times=t, data={"p_e_tot": pop, "p_s_tot": np.zeros_like(t), "norm_sq": pop}, dt=t[1])
    rate = decay_rate_from_trajectory(traj, long_time=True)
    assert rate == pytest.approx(0.05, rel=0.1)


def test_fit_scaling_recovers_cube_law():
    ns = [20, 30, 40, 50, 60]
    fit = fit_scaling([(n, 7.3 * n**-3.0) for n in ns])
    assert fit.alpha == pytest.approx(3.0, abs=1e-6)
    assert fit.prefactor == pytest.approx(7.3, rel=1e-6)
    assert fit.residual < 1e-12
    assert fit.polynomial


def test_fit_scaling_flags_non_polynomial():
    ns = np.array([20, 30, 40, 50, 60], dtype=float)
    rates = 1e-4 + 5.0 * ns**-3.0  # dephasing floor breaks the power law
    fit = fit_scaling(list(zip(ns, rates)))
    assert not fit.polynomial


def test_fit_scaling_needs_three_points():
    with pytest.raises(InsufficientDataError):
        fit_scaling([(10, 1.0), (20, 0.1)])
