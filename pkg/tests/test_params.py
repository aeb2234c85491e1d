"""Parameter validation and drive envelope behaviour."""

import math

import pytest

from wqed.errors import DispersiveRegimeWarning
from wqed.params import DriveSpec, PhysicalParams, validate_params


def test_reference_point_parameters_pass():
    p = PhysicalParams(n_atoms=100, gamma_1d=0.5, delta_c=94.0, rabi=18.8)
    report = validate_params(p, warn=False)
    assert report.ok
    assert not report.warnings


def test_zero_atoms_is_a_violation():
    report = validate_params(PhysicalParams(n_atoms=0), warn=False)
    assert not report.ok
    assert any("n_atoms" in v for v in report.violations)


def test_dispersive_warning_threshold():
    p = PhysicalParams(n_atoms=10, delta_c=10.0, rabi=9.0)
    with pytest.warns(DispersiveRegimeWarning):
        report = validate_params(p)
    assert report.ok
    assert report.warnings


def test_negative_rates_flagged():
    report = validate_params(PhysicalParams(n_atoms=3, gamma_1d=-1.0, gamma_deph=-0.5), warn=False)
    assert len(report.violations) == 2


def test_default_phase_per_site():
    p = PhysicalParams(n_atoms=4)
    assert p.phase_per_site == pytest.approx(math.pi / 2)
    p = PhysicalParams(n_atoms=4, kappa=9e-4)
    assert p.phase_per_site == pytest.approx(math.pi / 2 * (1 + 9e-4))
    p = PhysicalParams(n_atoms=4, ka=math.pi)
    assert p.phase_per_site == pytest.approx(math.pi)


def test_sin2_pulse_envelope():
    d = DriveSpec(kind="sin2-pulse", amplitude=2.0, pulse_width=3.0)
    assert d.envelope(-0.1) == 0.0
    assert d.envelope(0.0) == 0.0
    assert d.envelope(3.0) == pytest.approx(2.0)  # peak at t0
    assert d.envelope(6.0) == pytest.approx(0.0)
    assert d.envelope(6.1) == 0.0
    assert d.envelope(1.5) == pytest.approx(2.0 * math.sin(math.pi / 4) ** 2)


def test_cw_envelope_and_off():
    d = DriveSpec(kind="cw", amplitude=0.3, detuning=1.5)
    assert d.envelope(123.0) == 0.3
    off = d.off()
    assert off.amplitude == 0.0
    assert off.detuning == 1.5


def test_drive_validation():
    with pytest.raises(ValueError):
        DriveSpec(kind="square", amplitude=1.0)
    with pytest.raises(ValueError):
        DriveSpec(kind="sin2-pulse", amplitude=1.0)
    with pytest.raises(ValueError):
        DriveSpec(kind="cw", amplitude=-1.0)
