"""Linear-optics transfer-matrix model of the chain.

Each atom is a point scatterer with frequency-dependent reflection and
transmission coefficients (always obeying ``t = 1 + r``); free propagation
between sites imprints a pure phase.  Input and output field pairs are
related by 2 x 2 matrices::

    M_scatt = (1/t) [[t^2 - r^2, r], [-r, 1]]      M_free = diag(e^{i ka}, e^{-i ka})

cascaded right-to-left as ``M_scatt^(N) M_free ... M_scatt^(1) M_free``; the
total coefficients follow as ``r_tot = M12 / M22`` and ``t_tot = 1 / M22``.

Three coefficient families are provided:

* the bare three-level atom (closed form);
* the gate-dressed atom: a non-radiating ancilla holds the gate excitation
  and talks to the scatterer only through the alternating exchange
  ``+-coupling_j``; its steady-state response is solved from the coupled
  optical Bloch equations with the populations pinned to the gate
  configuration, to first order in the probe;
* the same constructions with pure dephasing of the ground-to-storage
  coherence, obtained from the Lindblad steady state.

Dephasing convention: a rate ``gamma`` on the g-s coherence is realized by
level dephasing of g and s at ``gamma`` each, which also damps the g-e
coherence at ``gamma / 2``.  This is the convention under which the dephased
mirror spectrum reduces to the closed-form Lorentzian of
:func:`wqed.effective.dephased_lorentzian`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from wqed.errors import (
    IllegalBranchError,
    PerturbativeValidityWarning,
    SingularCoefficientError,
)
from wqed.observables import SpectrumResult
from wqed.params import PhysicalParams

T_SINGULAR = 1e-12


@dataclass(frozen=True)
class ScatterCoeffs:
    """Single-site reflection and transmission amplitudes."""

    r: complex
    t: complex

    @classmethod
    def from_r(cls, r: complex) -> "ScatterCoeffs":
        return cls(r=r, t=1.0 + r)


def bare_three_level_coeffs(p: PhysicalParams, delta: float) -> ScatterCoeffs:
    """Closed-form coefficients of one undressed three-level atom.

    With the control field off this reduces to the two-level result
    ``r = -gamma_1d / (gamma_1d + gamma_prime - 2 i delta)``.
    """
    g, gp, om, dc = p.gamma_1d, p.gamma_prime, p.rabi, p.delta_c
    if om == 0.0:
        den = g + gp - 2j * delta
        if abs(den) < 1e-14:
            raise SingularCoefficientError("two-level coefficient singular (no damping, on resonance)")
        return ScatterCoeffs.from_r(-g / den)
    den = (g + gp - 2j * delta) * (delta - dc) + 2j * om * om
    if abs(den) < 1e-14:
        raise SingularCoefficientError(f"three-level coefficient singular at delta={delta}")
    return ScatterCoeffs.from_r(-g * (delta - dc) / den)


# -- pinned-population linear response ----------------------------------------

_LEVELS = ("g", "e", "s")


def _single_atom_h(p: PhysicalParams, delta: float, radiative: bool) -> np.ndarray:
    """3 x 3 rotating-frame Hamiltonian; ``radiative`` adds the decay width."""
    width = 0.5j * (p.gamma_1d + p.gamma_prime) if radiative else 0.0
    h = np.zeros((3, 3), dtype=np.complex128)
    h[1, 1] = -(delta + width)
    h[2, 2] = -(delta - p.delta_c)
    h[1, 2] = h[2, 1] = -p.rabi
    return h


def _coherence_response(h_full, levels, ket_states, bra_states, deph_levels, gamma, source):
    """Steady first-order coherence block with populations pinned.

    Solves ``0 = -i (H_K C - C H_B^+) + D o C + S`` for the matrix ``C`` of
    coherences between the ket sector (one probe excitation) and the bra
    sector (none).  ``deph_levels`` lists, per subsystem level-tuple entry,
    whether that level dephases; the decoration ``D`` follows from projector
    Lindblad terms at rate ``gamma`` on each flagged level.
    """
    ket_idx = {s: i for i, s in enumerate(ket_states)}
    bra_idx = {s: i for i, s in enumerate(bra_states)}
    nk, nb = len(ket_states), len(bra_states)
    HK = np.array([[h_full[levels[a], levels[b]] for b in ket_states] for a in ket_states])
    HB = np.array([[h_full[levels[a], levels[b]] for b in bra_states] for a in bra_states])

    def deco(state_a, state_b):
        d = 0.0
        for lev in deph_levels:
            ina = float(lev(state_a))
            inb = float(lev(state_b))
            d += gamma * (ina * inb - 0.5 * (ina + inb))
        return d

    A = np.zeros((nk * nb, nk * nb), dtype=np.complex128)
    for a in range(nk):
        for b in range(nb):
            row = a * nb + b
            for a2 in range(nk):
                A[row, a2 * nb + b] += -1j * HK[a, a2]
            for b2 in range(nb):
                A[row, a * nb + b2] += 1j * np.conj(HB[b, b2])
            A[row, row] += deco(ket_states[a], bra_states[b])

    S = np.zeros(nk * nb, dtype=np.complex128)
    for (ka, kb), val in source.items():
        S[ket_idx[ka] * nb + bra_idx[kb]] = val
    try:
        C = np.linalg.solve(A, -S)
    except np.linalg.LinAlgError as exc:
        raise SingularCoefficientError(f"coherence system singular: {exc}") from exc
    return C.reshape(nk, nb), ket_idx, bra_idx


def _coeffs_single_atom(p: PhysicalParams, delta: float, gamma: float) -> ScatterCoeffs:
    levels = {lev: i for i, lev in enumerate(_LEVELS)}
    h = _single_atom_h(p, delta, radiative=True)
    deph = [lambda s: s == "g", lambda s: s == "s"]
    C, ket_idx, _ = _coherence_response(
        h, levels, ["e", "s"], ["g"], deph, gamma, {("e", "g"): 1j}
    )
    # unit drive amplitude in the source, so C is already per unit field
    r = 0.5j * p.gamma_1d * C[ket_idx["e"], 0]
    return ScatterCoeffs.from_r(r)


def _coeffs_with_ancilla(
    p: PhysicalParams, delta: float, gamma: float, branch: str, sign: int
) -> ScatterCoeffs:
    if branch not in ("e", "s"):
        raise IllegalBranchError(
            f"gate branch must be 'e' or 's', got {branch!r}; mixed probe/gate species "
            "exchange population and are outside this model"
        )
    if p.delta_c != 0.0 and abs(p.rabi / p.delta_c) >= 0.5:
        warnings.warn(
            "pinned-population ancilla model assumes (rabi/delta_c)^2 << 1",
            PerturbativeValidityWarning,
            stacklevel=3,
        )
    h1 = _single_atom_h(p, delta, radiative=True)
    h2 = _single_atom_h(p, delta, radiative=False)
    n = 3
    pairs = [(a, b) for a in _LEVELS for b in _LEVELS]
    levels = {s: i for i, s in enumerate(pairs)}
    H = np.zeros((9, 9), dtype=np.complex128)
    li = {lev: i for i, lev in enumerate(_LEVELS)}
    for (a1, a2) in pairs:
        for (b1, b2) in pairs:
            v = 0.0
            if a2 == b2:
                v += h1[li[a1], li[b1]]
            if a1 == b1:
                v += h2[li[a2], li[b2]]
            # alternating exchange: e s <-> s e between atom and ancilla
            if (a1, a2) == ("e", "s") and (b1, b2) == ("s", "e"):
                v += sign * p.coupling_j
            if (a1, a2) == ("s", "e") and (b1, b2) == ("e", "s"):
                v += sign * p.coupling_j
            H[levels[(a1, a2)], levels[(b1, b2)]] = v

    gate = branch
    ket_states = [("e", "e"), ("e", "s"), ("s", "e"), ("s", "s")]
    bra_states = [("g", "e"), ("g", "s")]
    deph = [
        lambda s: s[0] == "g",
        lambda s: s[0] == "s",
        lambda s: s[1] == "g",
        lambda s: s[1] == "s",
    ]
    source = {(("e", gate), ("g", gate)): 1j}
    C, ket_idx, bra_idx = _coherence_response(
        H, levels, ket_states, bra_states, deph, gamma, source
    )
    r = 0.5j * p.gamma_1d * (
        C[ket_idx[("e", "e")], bra_idx[("g", "e")]]
        + C[ket_idx[("e", "s")], bra_idx[("g", "s")]]
    )
    return ScatterCoeffs.from_r(r)


def ancilla_dressed_coeffs(
    p: PhysicalParams, delta: float, branch: str, sign: int = +1
) -> ScatterCoeffs:
    """Coefficients of one atom dressed by a gate held in a dark ancilla.

    ``branch`` selects both the gate species and the probed transition
    family ('s': gate in the storage state, probe near two-photon resonance;
    'e': gate in the excited state, probe near single-photon resonance).
    ``sign`` is the sublattice sign of the exchange to the ancilla.
    """
    return _coeffs_with_ancilla(p, delta, 0.0, branch, sign)


def dephased_coeffs(
    p: PhysicalParams,
    delta: float,
    gamma: float,
    gate: str | None = None,
    sign: int = +1,
) -> ScatterCoeffs:
    """Single-site coefficients with g-s dephasing at rate ``gamma``.

    ``gate=None`` dephases the bare three-level atom; ``gate='e'/'s'`` adds
    the ancilla construction (both atoms dephase).
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if gate is None:
        return _coeffs_single_atom(p, delta, gamma)
    return _coeffs_with_ancilla(p, delta, gamma, gate, sign)


# -- cascading -----------------------------------------------------------------


def scatter_matrix(c: ScatterCoeffs) -> np.ndarray:
    if abs(c.t) < T_SINGULAR:
        raise SingularCoefficientError(f"perfect reflector cell (|t| = {abs(c.t):.2e}) cannot be cascaded")
    r, t = c.r, c.t
    return np.array([[(t * t - r * r) / t, r / t], [-r / t, 1.0 / t]], dtype=np.complex128)


def free_matrix(phase: float) -> np.ndarray:
    return np.array([[np.exp(1j * phase), 0.0], [0.0, np.exp(-1j * phase)]], dtype=np.complex128)


CoeffProvider = Callable[[float], ScatterCoeffs]


@dataclass(frozen=True)
class UnitCell:
    """One repetition of the lattice: (coefficient provider, phase) entries.

    Providers are either constants or callables of the probe detuning;
    entries are ordered from the input side.
    """

    entries: Sequence

    def evaluate(self, delta: float):
        out = []
        for provider, phase in self.entries:
            c = provider(delta) if callable(provider) else provider
            out.append((c, float(phase)))
        return out


def cascade(coeff_phase_pairs) -> tuple[complex, complex]:
    """Total (r, t) of an explicit scatterer sequence (input side first)."""
    M = np.eye(2, dtype=np.complex128)
    for c, phase in coeff_phase_pairs:
        M = scatter_matrix(c) @ free_matrix(phase) @ M
    if abs(M[1, 1]) < T_SINGULAR:
        raise SingularCoefficientError("cascade is singular (|M22| ~ 0)")
    return M[0, 1] / M[1, 1], 1.0 / M[1, 1]


def cascade_spectrum(cell: UnitCell, n_repeats: int, deltas) -> SpectrumResult:
    """Reflectance and transmittance of ``n_repeats`` unit cells per detuning."""
    deltas = np.asarray(deltas, float)
    R = np.empty_like(deltas)
    T = np.empty_like(deltas)
    for k, delta in enumerate(deltas):
        M_unit = np.eye(2, dtype=np.complex128)
        for c, phase in cell.evaluate(delta):
            M_unit = scatter_matrix(c) @ free_matrix(phase) @ M_unit
        M = np.linalg.matrix_power(M_unit, n_repeats)
        if abs(M[1, 1]) < T_SINGULAR:
            raise SingularCoefficientError(f"cascade singular at delta={delta}")
        r_tot = M[0, 1] / M[1, 1]
        t_tot = 1.0 / M[1, 1]
        R[k] = abs(r_tot) ** 2
        T[k] = abs(t_tot) ** 2
    return SpectrumResult(deltas, R, T, meta={"n_repeats": n_repeats})


def uniform_cell(p: PhysicalParams, gamma: float = 0.0, phase: float | None = None) -> UnitCell:
    """One bare (optionally dephased) atom plus one propagation step."""
    ph = p.phase_per_site if phase is None else phase
    if gamma == 0.0:
        provider = lambda d: bare_three_level_coeffs(p, d)
    else:
        provider = lambda d: dephased_coeffs(p, d, gamma)
    return UnitCell(entries=((provider, ph),))


def conditional_cell(
    p: PhysicalParams, branch: str = "s", gamma: float = 0.0, phase: float | None = None
) -> UnitCell:
    """Two-atom cell with alternating exchange signs (+J then -J).

    The doubled period seen by the probe when a gate excitation is stored:
    cell = atom(+J), propagation, atom(-J), propagation.
    """
    ph = p.phase_per_site if phase is None else phase
    if gamma == 0.0:
        plus = lambda d: ancilla_dressed_coeffs(p, d, branch, +1)
        minus = lambda d: ancilla_dressed_coeffs(p, d, branch, -1)
    else:
        plus = lambda d: dephased_coeffs(p, d, gamma, gate=branch, sign=+1)
        minus = lambda d: dephased_coeffs(p, d, gamma, gate=branch, sign=-1)
    return UnitCell(entries=((plus, ph), (minus, ph)))
