"""Closed-form perturbative predictions for the dressed chain.

Everything here is a pure function of the parameters, so scenario code can
put "prediction vs numerics" side by side.  Validity is the dispersive
regime: control field far detuned, ``|rabi| << |delta_c|`` and
``|delta_c +- coupling_j| >> |rabi|``.

Level bookkeeping (probe detuning at which transitions occur):

* e-branch single photon: ``-rabi^2/delta_c`` (plain ac-Stark shift);
* s-branch single photon: ``delta_c + rabi^2/delta_c``;
* conditional (second-photon) resonances shift by the pair-dependent Stark
  shifts ``-2 rabi^2/(delta_c + J_mn)`` (double-e) and ``+2 rabi^2 /
  (delta_c - J_mn)`` (double-s) with ``J_mn = +-coupling_j`` alternating
  between the two sublattices of doubled period.

Effective linewidths follow from the excited-state weight of the dressed
states: a resonance with e-weight ``p`` radiates at ``p * gamma_1d`` into
the guide and ``p * gamma_prime`` into free space.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from wqed.errors import PerturbativeValidityWarning, ValidityError
from wqed.params import PhysicalParams


@dataclass(frozen=True)
class StarkShifts:
    """ac-Stark shifts of the dressed levels for one sublattice sign."""

    single_e: float  # dressed e energy shift
    single_s: float  # dressed s energy (includes the bare delta_c)
    dw_ee: float  # double-e pair shift
    dw_ss: float  # double-s pair shift


@dataclass(frozen=True)
class ConditionalResonance:
    """One second-photon resonance on a given sublattice."""

    sign: int  # J_mn = sign * coupling_j on this sublattice
    delta: float  # probe detuning of the resonance
    epsilon: float  # e-s mixing amplitude of the dressed pair state
    p_e: float  # e-weight entering the effective rates
    gamma_1d_eff: float
    gamma_prime_eff: float


@dataclass(frozen=True)
class ResonanceSet:
    """Single-photon and conditional resonances of one branch."""

    branch: str
    delta_single: float
    epsilon_single: float
    p_e_single: float
    gamma_1d_eff_single: float
    gamma_prime_eff_single: float
    plus: ConditionalResonance
    minus: ConditionalResonance

    @property
    def splitting(self) -> float:
        return self.plus.delta - self.minus.delta


def _check_dispersive(p: PhysicalParams) -> None:
    om, dc, j = abs(p.rabi), abs(p.delta_c), abs(p.coupling_j)
    if om == 0.0:
        return
    if min(abs(dc - j), dc + j) < 10.0 * om:
        warnings.warn(
            f"|delta_c +- coupling_j| = {abs(dc - j):.3g} within 10x rabi = {10 * om:.3g}; "
            "second-order shifts are marginal",
            PerturbativeValidityWarning,
            stacklevel=3,
        )


def stark_shifts(p: PhysicalParams, sign: int = +1) -> StarkShifts:
    """Dressed-level shifts for sublattice coupling ``sign * coupling_j``."""
    _check_dispersive(p)
    om2 = p.rabi**2
    dc = p.delta_c
    j = sign * p.coupling_j
    return StarkShifts(
        single_e=-om2 / dc,
        single_s=dc + om2 / dc,
        dw_ee=-2.0 * om2 / (dc + j),
        dw_ss=+2.0 * om2 / (dc - j),
    )


def resonances(p: PhysicalParams, branch: str) -> ResonanceSet:
    """Resonance positions and effective rates of the e- or s-branch."""
    if branch not in ("e", "s"):
        raise ValueError(f"branch must be 'e' or 's', got {branch!r}")
    _check_dispersive(p)
    om, dc = p.rabi, p.delta_c
    om2 = om * om

    def conditional(sign: int) -> ConditionalResonance:
        j_mn = sign * p.coupling_j
        if branch == "s":
            delta = dc + 2.0 * om2 / (dc - j_mn) - om2 / dc
            eps = om / (j_mn - dc)
            p_e = eps * eps
        else:
            delta = -2.0 * om2 / (dc + j_mn) + om2 / dc
            eps = om / (j_mn + dc)
            p_e = 1.0 / (1.0 + eps * eps)
        return ConditionalResonance(
            sign=sign,
            delta=delta,
            epsilon=eps,
            p_e=p_e,
            gamma_1d_eff=p_e * p.gamma_1d,
            gamma_prime_eff=p_e * p.gamma_prime,
        )

    eps1 = om / dc
    if branch == "s":
        delta1 = dc + om2 / dc
        p_e1 = eps1 * eps1
    else:
        delta1 = -om2 / dc
        p_e1 = 1.0 / (1.0 + eps1 * eps1)
    return ResonanceSet(
        branch=branch,
        delta_single=delta1,
        epsilon_single=eps1,
        p_e_single=p_e1,
        gamma_1d_eff_single=p_e1 * p.gamma_1d,
        gamma_prime_eff_single=p_e1 * p.gamma_prime,
        plus=conditional(+1),
        minus=conditional(-1),
    )


def splitting_formula(p: PhysicalParams) -> float:
    """Sublattice resonance separation 4 rabi^2 J / (delta_c^2 - J^2)."""
    return 4.0 * p.rabi**2 * p.coupling_j / (p.delta_c**2 - p.coupling_j**2)


def lorentzian_reflectance(n_half: int, gamma_1d: float, gamma_prime: float, delta: float) -> float:
    """Collective mirror response of n_half atoms at half-wave spacing."""
    half_width = n_half * gamma_1d
    return half_width**2 / ((half_width + gamma_prime) ** 2 + (2.0 * delta) ** 2)


def dephased_lorentzian(
    n_half: int,
    gamma_1d: float,
    gamma_prime: float,
    gamma: float,
    p_lambda: float,
    kappa_lambda: float,
    delta_prime: float,
) -> float:
    """Mirror Lorentzian around one dressed resonance with dephasing folded in.

    ``delta_prime`` is measured from the resonance; dephasing enters as the
    substitution ``gamma_prime -> gamma_prime + gamma * kappa_lambda`` on
    top of the ``p_lambda``-rescaled rates.
    """
    width = p_lambda * (n_half * gamma_1d)
    damp = p_lambda * (n_half * gamma_1d + gamma_prime + gamma * kappa_lambda)
    return width**2 / (damp**2 + (2.0 * delta_prime) ** 2)


def kappa_lambda_dispersive(rabi: float, lam: float, delta_c: float, gamma: float = 0.0) -> float:
    """Dephasing-amplification coefficient 1 + 2 rabi^2 / (lam - delta_c)^2.

    Valid for couplings much smaller than the control detuning and for
    ``gamma`` small against the dressed-state splitting ``|lam - delta_c|``.
    """
    gap = abs(lam - delta_c)
    if gamma >= gap:
        raise ValidityError(
            f"gamma = {gamma:g} is not small against |lambda - delta_c| = {gap:g}"
        )
    return 1.0 + 2.0 * rabi**2 / (lam - delta_c) ** 2


def phase_compensation(
    delta_e: float, delta_s: float, gamma_1d_e: float, gamma_1d_s: float
) -> tuple[float, float]:
    """Propagation-phase correction cancelling off-resonant sublattice kicks.

    ``delta_mu`` are the detunings of the probe from the off-resonant
    sublattice e- and s-transitions, ``gamma_1d_mu`` their effective guided
    rates.  Returns ``(kappa, ka)`` with ``ka = (pi/2)(1 + kappa)``.
    """
    kappa = 0.0
    for gam, det in ((gamma_1d_e, delta_e), (gamma_1d_s, delta_s)):
        if gam == 0.0:
            continue
        if det == 0.0:
            raise ValidityError("off-resonant detuning must be nonzero")
        if abs(det) < 10.0 * gam:
            warnings.warn(
                f"first-order expansion marginal: |detuning| = {abs(det):g} "
                f"within 10x guided rate {gam:g}",
                PerturbativeValidityWarning,
                stacklevel=2,
            )
        kappa += gam / (math.pi * det)
    return kappa, 0.5 * math.pi * (1.0 + kappa)
