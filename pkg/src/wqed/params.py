"""Physical parameters of the atom chain and the probe drive.

Unit conventions used throughout the package:

* the free-space decay rate of a single atom sets the rate unit, so
  ``gamma_prime = 1.0`` unless a scenario explicitly turns free-space decay
  off; all times are measured in its inverse;
* the lattice constant sets the length unit, atom ``m`` sits at ``z = m``
  for ``m = 1..N``;
* the band-gap guided mode is a standing wave with one sign flip per site,
  hence the alternating factor ``(-1)**(m + n)`` in the exchange coupling.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from wqed.errors import DispersiveRegimeWarning

# Band-gap standing-wave phase advance per lattice site.  cos(q z_m) with
# q = pi / a evaluates to (-1)**m on the lattice, which is all the code ever
# needs of it.
Q_ZA_PHASE = math.pi


def sublattice_sign(m: int, n: int) -> int:
    """Alternating sign (-1)**(m+n) between 1-based atom indices m and n."""
    return -1 if (m + n) % 2 else 1


@dataclass(frozen=True)
class PhysicalParams:
    """Chain, coupling and control-field rates in free-space-decay units.

    ``ka`` is the propagation phase of the probe between neighbouring atoms.
    When left as ``None`` it defaults to ``(pi/2) * (1 + kappa)``, i.e. the
    quarter-wave lattice with the small compensation ``kappa`` applied.
    Mirror-configuration studies pass ``ka = pi`` explicitly.
    """

    n_atoms: int
    gamma_1d: float = 1.0
    gamma_prime: float = 1.0
    coupling_j: float = 0.0
    rabi: float = 0.0
    delta_c: float = 0.0
    ka: float | None = None
    kappa: float = 0.0
    range_l: float = math.inf
    gamma_deph: float = 0.0

    @property
    def phase_per_site(self) -> float:
        """Effective probe phase advance per site."""
        if self.ka is not None:
            return self.ka
        return 0.5 * math.pi * (1.0 + self.kappa)

    def positions(self):
        """Atom positions z_m = m (1-based) in lattice units."""
        import numpy as np

        return np.arange(1, self.n_atoms + 1, dtype=float)


@dataclass(frozen=True)
class DriveSpec:
    """Probe field entering the waveguide from the left.

    ``kind`` is ``"cw"`` (constant envelope) or ``"sin2-pulse"``, the latter
    with envelope ``amplitude * sin(pi t / (2 t0))**2`` on ``0 <= t <= 2 t0``
    and zero outside.  ``detuning`` is measured from the bare single-atom
    transition of the probed line.
    """

    kind: str = "cw"
    amplitude: float = 0.0
    detuning: float = 0.0
    pulse_width: float | None = None

    KINDS = ("cw", "sin2-pulse")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown drive kind {self.kind!r}; expected one of {self.KINDS}")
        if self.amplitude < 0:
            raise ValueError("drive amplitude must be non-negative")
        if self.kind == "sin2-pulse" and (self.pulse_width is None or self.pulse_width <= 0):
            raise ValueError("sin2-pulse drive needs a positive pulse_width")

    @property
    def is_pulsed(self) -> bool:
        return self.kind == "sin2-pulse"

    def envelope(self, t: float) -> float:
        """Real drive envelope at time t."""
        if self.kind == "cw":
            return self.amplitude
        t0 = self.pulse_width
        if t < 0.0 or t > 2.0 * t0:
            return 0.0
        s = math.sin(0.5 * math.pi * t / t0)
        return self.amplitude * s * s

    def off(self) -> "DriveSpec":
        """Copy of this drive with zero amplitude (background runs)."""
        return DriveSpec(self.kind, 0.0, self.detuning, self.pulse_width)


@dataclass
class ValidationReport:
    """Outcome of :func:`validate_params`: hard violations plus soft warnings."""

    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_params(p: PhysicalParams, warn: bool = True) -> ValidationReport:
    """Check the invariants of a parameter set.

    Hard invariant failures are collected in ``violations``; the dispersive
    regime check (``|rabi / delta_c| < 0.5``, the working assumption of every
    perturbative formula in :mod:`wqed.effective`) only produces a warning.
    """
    report = ValidationReport()
    if int(p.n_atoms) != p.n_atoms or p.n_atoms < 1:
        report.violations.append(f"n_atoms must be a positive integer, got {p.n_atoms}")
    if p.gamma_1d < 0:
        report.violations.append(f"gamma_1d must be >= 0, got {p.gamma_1d}")
    if p.gamma_prime < 0:
        report.violations.append(f"gamma_prime must be >= 0, got {p.gamma_prime}")
    if p.gamma_deph < 0:
        report.violations.append(f"gamma_deph must be >= 0, got {p.gamma_deph}")
    if not (p.range_l > 0):
        report.violations.append(f"range_l must be > 0 (or infinite), got {p.range_l}")

    if p.delta_c != 0.0 and abs(p.rabi / p.delta_c) >= 0.5:
        report.warnings.append(
            "outside the dispersive regime |rabi/delta_c| < 0.5 "
            f"(|{p.rabi}/{p.delta_c}| = {abs(p.rabi / p.delta_c):.3g}); "
            "perturbative predictions degrade"
        )
    elif p.delta_c == 0.0 and p.rabi != 0.0:
        report.warnings.append("rabi != 0 with delta_c = 0: control field on resonance")

    if warn:
        for msg in report.warnings:
            warnings.warn(msg, DispersiveRegimeWarning, stacklevel=2)
    return report
