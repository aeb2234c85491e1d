"""Closed-form perturbative predictions."""

import numpy as np
import pytest

from wqed.effective import (
    dephased_lorentzian,
    kappa_lambda_dispersive,
    lorentzian_reflectance,
    phase_compensation,
    resonances,
    splitting_formula,
    stark_shifts,
)
from wqed.errors import PerturbativeValidityWarning, ValidityError
from wqed.params import PhysicalParams

P_FIG3 = PhysicalParams(n_atoms=100, gamma_1d=0.5, coupling_j=25.0, rabi=18.8, delta_c=94.0)
P_BIG = PhysicalParams(n_atoms=100, gamma_1d=1.0, coupling_j=235.0, rabi=94.0, delta_c=470.0)


def test_single_excitation_stark_shift():
    sh = stark_shifts(P_FIG3, +1)
    assert sh.single_e == pytest.approx(-3.76)
    assert sh.single_s == pytest.approx(94.0 + 3.76)


def test_pair_shift_value():
    with pytest.warns(PerturbativeValidityWarning):
        sh = stark_shifts(P_BIG, +1)
    assert sh.dw_ee == pytest.approx(-2 * 94.0**2 / 705.0)
    assert sh.dw_ee == pytest.approx(-25.0667, abs=1e-3)
    assert sh.dw_ss == pytest.approx(+2 * 94.0**2 / 235.0)


def test_no_sublattice_dependence_without_exchange():
    p = PhysicalParams(n_atoms=10, rabi=5.0, delta_c=50.0, coupling_j=0.0)
    a = stark_shifts(p, +1)
    b = stark_shifts(p, -1)
    assert a.dw_ee == b.dw_ee == pytest.approx(-2 * 25.0 / 50.0)


def test_resonance_positions_fig3():
    rs = resonances(P_FIG3, "s")
    assert rs.delta_single == pytest.approx(97.76)
    assert rs.splitting == pytest.approx(splitting_formula(P_FIG3))
    assert splitting_formula(P_FIG3) == pytest.approx(4.30, abs=0.01)


def test_sign_symmetry_of_conditionals():
    rs = resonances(P_FIG3, "s")
    flipped = resonances(
        PhysicalParams(
            n_atoms=100, gamma_1d=0.5, coupling_j=-25.0, rabi=18.8, delta_c=94.0
        ),
        "s",
    )
    assert rs.plus.delta == pytest.approx(flipped.minus.delta)
    assert rs.plus.gamma_1d_eff == pytest.approx(flipped.minus.gamma_1d_eff)


def test_effective_rates_s_branch():
    with pytest.warns(PerturbativeValidityWarning):
        rs = resonances(P_BIG, "s")
    assert rs.gamma_1d_eff_single == pytest.approx((94.0 / 470.0) ** 2 * 1.0)
    assert rs.plus.epsilon**2 == pytest.approx(0.16)
    assert rs.minus.epsilon**2 == pytest.approx((94.0 / 705.0) ** 2)
    assert rs.plus.gamma_1d_eff / rs.plus.gamma_prime_eff == pytest.approx(1.0)


def test_e_branch_rates_near_bare():
    rs = resonances(P_FIG3, "e")
    assert rs.delta_single == pytest.approx(-3.76)
    assert rs.gamma_1d_eff_single == pytest.approx(0.5, rel=0.05)
    assert rs.plus.gamma_1d_eff == pytest.approx(0.5, rel=0.05)


def test_dressed_energy_matches_exact_two_level():
    # second-order shifts against exact diagonalization of the (delta_c, rabi)
    # two-level problem, to fourth-order accuracy
    om, dc = 3.0, 80.0
    p = PhysicalParams(n_atoms=1, rabi=om, delta_c=dc)
    sh = stark_shifts(p, +1)
    exact_low = 0.5 * (dc - np.sqrt(dc * dc + 4 * om * om))
    exact_high = 0.5 * (dc + np.sqrt(dc * dc + 4 * om * om))
    assert sh.single_e == pytest.approx(exact_low, abs=5 * om**4 / dc**3)
    assert sh.single_s == pytest.approx(exact_high, abs=5 * om**4 / dc**3)


def test_mirror_lorentzian_values():
    assert lorentzian_reflectance(50, 1.0, 1.0, 0.0) == pytest.approx(2500.0 / 2601.0)
    assert lorentzian_reflectance(50, 1.0, 0.0, 0.0) == 1.0
    # half maximum at 2 delta = (N/2) g + g'
    half = lorentzian_reflectance(50, 1.0, 1.0, 51.0 / 2.0)
    assert half == pytest.approx(0.5 * lorentzian_reflectance(50, 1.0, 1.0, 0.0))


def test_lorentzian_even_and_peaked():
    for d in (0.5, 3.0, 20.0):
        assert lorentzian_reflectance(10, 1.0, 0.7, d) == lorentzian_reflectance(10, 1.0, 0.7, -d)
        assert lorentzian_reflectance(10, 1.0, 0.7, d) < lorentzian_reflectance(10, 1.0, 0.7, 0.0)


def test_kappa_lambda_value():
    # at the storage resonance the amplification is 1 + 2 (delta_c / rabi)^2
    lam = 94.0 + 3.76
    assert kappa_lambda_dispersive(18.8, lam, 94.0) == pytest.approx(51.0, abs=1e-9)


def test_kappa_lambda_validity_guard():
    with pytest.raises(ValidityError):
        kappa_lambda_dispersive(18.8, 94.0 + 3.76, 94.0, gamma=5.0)


def test_dephased_lorentzian_reduces_at_zero_gamma():
    for d in (0.0, 0.3, 1.0):
        a = dephased_lorentzian(50, 1.0, 1.0, 0.0, 1.0, 51.0, d)
        assert a == pytest.approx(lorentzian_reflectance(50, 1.0, 1.0, d))


def test_phase_compensation_values():
    kappa, ka = phase_compensation(0.0, 0.0, 0.0, 0.0)
    assert kappa == 0.0
    assert ka == pytest.approx(np.pi / 2)
    kappa, ka = phase_compensation(550.0, 38.0, 1.0, 0.018)
    expected = 1.0 / (np.pi * 550.0) + 0.018 / (np.pi * 38.0)
    assert kappa == pytest.approx(expected)
    assert ka == pytest.approx(np.pi / 2 * (1 + expected))


def test_phase_compensation_warns_when_marginal():
    with pytest.warns(PerturbativeValidityWarning):
        phase_compensation(5.0, 100.0, 1.0, 0.01)


def test_splitting_formula_against_exact_difference():
    # the closed formula equals the difference of the unexpanded shifts
    for j in (5.0, 25.0, 40.0):
        p = PhysicalParams(n_atoms=10, coupling_j=j, rabi=18.8, delta_c=94.0)
        rs = resonances(p, "s")
        assert rs.splitting == pytest.approx(splitting_formula(p), rel=1e-12)
