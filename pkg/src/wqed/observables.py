"""Output fields and derived observables of the spin model.

The guided field is reconstructed from the atomic coherences: the right- and
left-going field operators at position ``z`` are::

    E_plus(z)  = E_in * 1 + i (gamma_1d_m / 2) sum_m sigma_ge^m e^{+i k (z - z_m)}
    E_minus(z) =            i (gamma_1d_m / 2) sum_m sigma_ge^m e^{-i k (z - z_m)}

with no input on the left-going component.  Transmission is evaluated behind
the chain (``z = N``), reflection in front of it (``z = 0``).  Each operator
application lowers the excitation number by at most one, plus the scalar
input part.

Convention note: :func:`intensity` divides by the state norm (the natural
choice for weak-drive steady states whose norm stays at 1 + O(amplitude^2)).
Trajectory recording of pulse runs instead stores the raw expectation value
``<psi| E+ E |psi>`` of the decaying wavefunction, which is what the
background-subtraction recipe for pulse reflectances needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from wqed.errors import GridMismatchError, NegativeIntegrandWarning, UndefinedStateError
from wqed.hamiltonian import SpinHamiltonian


@dataclass(frozen=True)
class FieldOperatorSpec:
    """Which output channel to evaluate and the scalar input it carries.

    ``direction`` is +1 (right-going, transmission side) or -1 (left-going,
    reflection side).  ``z`` defaults to the chain end for +1 and the chain
    start (0) for -1.  ``e_in`` is the complex input-field amplitude at the
    evaluation point; the left-going channel has no input.
    """

    direction: int = +1
    z: float | None = None
    e_in: complex = 0.0

    def __post_init__(self):
        if self.direction not in (+1, -1):
            raise ValueError("direction must be +1 or -1")
        if self.direction == -1 and self.e_in != 0.0:
            raise ValueError("left-going channel carries no input field")

    def position(self, n_atoms: int) -> float:
        if self.z is not None:
            return self.z
        return float(n_atoms) if self.direction == +1 else 0.0


def transmission_spec(ham: SpinHamiltonian, e0: complex) -> FieldOperatorSpec:
    """Right-going channel behind the chain with the cw input included."""
    z = float(ham.basis.n_atoms)
    return FieldOperatorSpec(+1, z, e0 * np.exp(1j * ham.phase_per_site * z))


def reflection_spec(ham: SpinHamiltonian) -> FieldOperatorSpec:
    """Left-going channel in front of the chain (no input)."""
    return FieldOperatorSpec(-1, 0.0, 0.0)


def apply_output_field(
    psi: np.ndarray, spec: FieldOperatorSpec, ham: SpinHamiltonian
) -> np.ndarray:
    """Apply the chosen field operator to a state."""
    basis = ham.basis
    basis.check_state(psi)
    z = spec.position(basis.n_atoms)
    f = (
        0.5j
        * ham.gamma_1d_atoms
        * np.exp(1j * spec.direction * ham.phase_per_site * (z - ham.positions))
    )
    out = spec.e_in * psi if spec.e_in != 0.0 else np.zeros_like(psi)
    sing = basis.singles_view(psi)
    out[0] += f @ sing[:, 0]
    if basis.max_exc == 2 and basis.n_pairs:
        EE, ES, _ = basis.gather_pair_matrices(basis.pairs_view(psi))
        o_sing = basis.singles_view(out)
        o_sing[:, 0] += EE @ f
        o_sing[:, 1] += f @ ES
    return out


def intensity(psi: np.ndarray, spec: FieldOperatorSpec, ham: SpinHamiltonian) -> float:
    """Normalized output intensity <E+ E> / <psi|psi>."""
    norm2 = float(np.vdot(psi, psi).real)
    if norm2 < 1e-300:
        raise UndefinedStateError("intensity of a zero-norm state is undefined")
    out = apply_output_field(psi, spec, ham)
    return float(np.vdot(out, out).real) / norm2


def intensity_raw(psi: np.ndarray, spec: FieldOperatorSpec, ham: SpinHamiltonian) -> float:
    """Unnormalized expectation <psi| E+ E |psi> (pulse bookkeeping)."""
    out = apply_output_field(psi, spec, ham)
    return float(np.vdot(out, out).real)


def g2_zero(psi_ss: np.ndarray, ham: SpinHamiltonian, e0: float) -> float:
    """Equal-time second-order correlation of the transmitted field.

    ``psi_ss`` must carry amplitudes up to second order in the drive (the
    two-excitation block feeds the two-photon numerator).
    """
    spec = transmission_spec(ham, e0)
    norm2 = float(np.vdot(psi_ss, psi_ss).real)
    if norm2 < 1e-300:
        raise UndefinedStateError("g2 of a zero-norm state is undefined")
    once = apply_output_field(psi_ss, spec, ham)
    denom = float(np.vdot(once, once).real) / norm2
    if denom <= 0.0 or denom < 1e-30 * abs(e0) ** 2:
        raise UndefinedStateError("transmitted intensity vanishes; g2 undefined")
    twice = apply_output_field(once, spec, ham)
    numer = float(np.vdot(twice, twice).real) / norm2
    return numer / denom**2


def population_map(psi: np.ndarray, basis) -> np.ndarray:
    """N x N map of double-s populations |<s_m s_n|psi>|^2 (zero diagonal)."""
    basis.check_state(psi)
    n = basis.n_atoms
    out = np.zeros((n, n))
    if basis.max_exc == 2 and basis.n_pairs:
        w = np.abs(basis.pairs_view(psi)[:, 3]) ** 2
        out[basis.pair_i, basis.pair_j] = w
        out[basis.pair_j, basis.pair_i] = w
    return out


def parity_class_weights(pop_map: np.ndarray) -> tuple[float, float]:
    """Total |s_m s_n|^2 weight on same-parity and cross-parity atom pairs.

    Same parity (both indices even or both odd, i.e. m + n even) means both
    excitations sit on one sublattice of the doubled period.
    """
    n = pop_map.shape[0]
    m = np.arange(1, n + 1)
    same = ((m[:, None] + m[None, :]) % 2) == 0
    iu = np.triu_indices(n, 1)
    w = pop_map[iu]
    s = same[iu]
    return float(w[s].sum()), float(w[~s].sum())


@dataclass
class SpectrumResult:
    """Detuning sweep of reflectance and transmittance."""

    deltas: np.ndarray
    reflectance: np.ndarray
    transmittance: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.deltas = np.asarray(self.deltas, float)
        self.reflectance = np.asarray(self.reflectance, float)
        self.transmittance = np.asarray(self.transmittance, float)
        if not (len(self.deltas) == len(self.reflectance) == len(self.transmittance)):
            raise ValueError("spectrum arrays must share one grid")


def pulse_reflectance(
    times: np.ndarray,
    i_with_gate: np.ndarray,
    i_background: np.ndarray,
    input_energy: float,
    warn_negative: bool = True,
) -> float:
    """Background-subtracted, time-integrated pulse reflectance.

    ``i_with_gate`` and ``i_background`` are raw reflected-intensity records
    on the same grid, the background taken from a drive-free run with the
    identical gate initial state.  ``input_energy`` is the time integral of
    the squared input envelope.
    """
    times = np.asarray(times, float)
    if times.shape != np.shape(i_with_gate) or times.shape != np.shape(i_background):
        raise GridMismatchError("trajectories do not share the time grid")
    if input_energy <= 0.0:
        raise UndefinedStateError("zero input energy: pulse reflectance undefined")
    signal = np.asarray(i_with_gate, float) - np.asarray(i_background, float)
    negative = -np.trapezoid(np.clip(signal, None, 0.0), times)
    total = np.trapezoid(signal, times)
    if warn_negative and negative > 0.02 * max(abs(total), input_energy * 1e-9):
        import warnings

        warnings.warn(
            f"background-subtracted intensity dips negative (integrated {negative:.3e}); "
            "interference residue between gate and signal fields",
            NegativeIntegrandWarning,
            stacklevel=2,
        )
    return float(total / input_energy)
