"""Rotating-frame non-Hermitian Hamiltonian of the driven chain.

The operator is the sum of

* per-excitation diagonal terms: every ``e`` excitation contributes
  ``-(delta + i gamma_prime / 2)``, every ``s`` excitation ``-(delta -
  delta_c)``, with ``delta`` the probe detuning of the drive;
* the guided-mode exchange ``-i (gamma_1d / 2) exp(i ka |m - n|)`` between
  ``e`` excitations, whose ``m = n`` term supplies the waveguide half-width
  ``-i gamma_1d / 2`` per excitation;
* the control-field conversion ``-rabi`` between ``e`` and ``s`` on the same
  atom;
* the band-gap exchange ``coupling_j * (-1)**(m+n) * exp(-|m-n|/L)`` swapping
  an ``e`` on one atom with an ``s`` on another;
* the drive ``-E(t) exp(i ka m)`` raising ``g -> e`` (plus conjugate).

The operator never materializes the dense matrix: one application costs a few
N x N matrix products (O(N * dimension)).  Instances are immutable after
construction and safe to share across threads; ``apply`` allocates its own
scratch, so concurrent calls on distinct state buffers are fine.

A non-scattering "ancilla" atom (zero waveguide and free-space rates, no
drive coupling) can be appended to hold a permanent gate excitation that the
chain only sees through the band-gap exchange.
"""

from __future__ import annotations

import numpy as np

from wqed._kernels import pair_block_apply
from wqed.basis import TwoExcitationBasis, build_basis
from wqed.errors import DimensionMismatchError
from wqed.params import DriveSpec, PhysicalParams


class SpinHamiltonian:
    """Matrix-free representation of the chain Hamiltonian.

    Per-atom arrays allow individual atoms (the gate ancilla) to be
    decoupled from the waveguide; ``bg_parity`` assigns the sublattice
    parity used in the alternating band-gap sign, defaulting to the atom
    index itself.
    """

    def __init__(
        self,
        params: PhysicalParams,
        drive: DriveSpec,
        basis: TwoExcitationBasis,
        *,
        gamma_1d_atoms=None,
        gamma_prime_atoms=None,
        drive_mask=None,
        bg_parity=None,
    ):
        if basis.n_atoms != params.n_atoms:
            raise DimensionMismatchError(
                f"basis built for {basis.n_atoms} atoms, params say {params.n_atoms}"
            )
        self.params = params
        self.drive = drive
        self.basis = basis
        n = params.n_atoms

        g1d = np.full(n, params.gamma_1d) if gamma_1d_atoms is None else np.asarray(gamma_1d_atoms, float)
        gp = np.full(n, params.gamma_prime) if gamma_prime_atoms is None else np.asarray(gamma_prime_atoms, float)
        mask = np.ones(n) if drive_mask is None else np.asarray(drive_mask, float)
        parity = np.arange(1, n + 1) if bg_parity is None else np.asarray(bg_parity, int)
        if not (len(g1d) == len(gp) == len(mask) == len(parity) == n):
            raise DimensionMismatchError("per-atom arrays must have length n_atoms")
        self.gamma_1d_atoms = g1d
        self.gamma_prime_atoms = gp
        self.drive_mask = mask
        self.bg_parity = parity

        phase = params.phase_per_site
        self.phase_per_site = phase
        pos = np.arange(1, n + 1, dtype=float)
        self.positions = pos
        self.delta = drive.detuning
        self.rabi = params.rabi

        # guided-mode kernel, symmetric, diagonal = -i gamma_1d_m / 2
        amp = np.sqrt(g1d)
        dist = np.abs(pos[:, None] - pos[None, :])
        self._W = -0.5j * np.outer(amp, amp) * np.exp(1j * phase * dist)
        # band-gap kernel, zero diagonal
        signs = np.where(((parity[:, None] + parity[None, :]) % 2) == 0, 1.0, -1.0)
        decay = np.exp(-dist / params.range_l) if np.isfinite(params.range_l) else 1.0
        B = params.coupling_j * signs * decay
        np.fill_diagonal(B, 0.0)
        self._B = B
        # diagonal energies (waveguide half-width lives in the kernel diagonal)
        self._diag_e = -(self.delta + 0.5j * gp)
        self._diag_s = -(self.delta - params.delta_c)
        # static drive phase pattern; the envelope multiplies it at call time
        self._u = mask * np.exp(1j * phase * pos)
        self._u_conj = np.conj(self._u)
        if basis.max_exc == 2 and basis.n_pairs:
            i, j = basis.pair_i, basis.pair_j
            de, ds = self._diag_e, self._diag_s
            # per-slot diagonal energies of (ee, es, se, ss) pair states
            self._diag_pairs = np.stack(
                [de[i] + de[j], de[i] + ds, de[j] + ds, np.full(len(i), 2.0 * ds)], axis=1
            )
            self._bg_pairs = np.ascontiguousarray(B[i, j], dtype=np.complex128)

    # -- application ---------------------------------------------------------

    def apply(self, psi: np.ndarray, t: float = 0.0) -> np.ndarray:
        """Return H(t) psi with the drive envelope evaluated at time t."""
        self.basis.check_state(psi)
        return self._apply(psi, self.drive.envelope(t))

    def apply_no_drive(self, psi: np.ndarray) -> np.ndarray:
        """Return H psi with the drive amplitude forced to zero."""
        self.basis.check_state(psi)
        return self._apply(psi, 0.0)

    def apply_drive_only(self, psi: np.ndarray, env: float) -> np.ndarray:
        """Apply just the drive term at envelope value ``env``.

        This is the only part of the operator that changes the excitation
        number; the hierarchical weak-drive solver uses it to source each
        order from the previous one.
        """
        self.basis.check_state(psi)
        basis = self.basis
        out = np.zeros_like(psi)
        if env == 0.0:
            return out
        v = env * self._u
        v_conj = env * self._u_conj
        sing = basis.singles_view(psi)
        E = sing[:, 0]
        S = sing[:, 1]
        o_sing = basis.singles_view(out)
        out[0] = -(v_conj @ E)
        o_sing[:, 0] = -v * psi[0]
        if basis.max_exc == 2 and basis.n_pairs:
            i, j = basis.pair_i, basis.pair_j
            pairs = basis.pairs_view(psi)
            n = basis.n_atoms
            EE = np.zeros((n, n), dtype=np.complex128)
            ES = np.zeros((n, n), dtype=np.complex128)
            EE[i, j] = pairs[:, 0]
            EE[j, i] = pairs[:, 0]
            ES[i, j] = pairs[:, 1]
            ES[j, i] = pairs[:, 2]
            o_sing[:, 0] -= EE @ v_conj
            o_sing[:, 1] -= v_conj @ ES
            opairs = basis.pairs_view(out)
            opairs[:, 0] = -(v[i] * E[j] + v[j] * E[i])
            opairs[:, 1] = -v[i] * S[j]
            opairs[:, 2] = -v[j] * S[i]
            opairs[:, 3] = 0.0
        return out

    def _apply(self, psi: np.ndarray, env: float) -> np.ndarray:
        basis = self.basis
        out = np.empty_like(psi)
        sing = basis.singles_view(psi)
        E = sing[:, 0]
        S = sing[:, 1]
        o_sing = basis.singles_view(out)

        oE = self._W @ E
        oE += self._diag_e * E
        oE -= self.rabi * S
        oS = self._diag_s * S - self.rabi * E

        if env != 0.0:
            v = env * self._u
            v_conj = env * self._u_conj
            out[0] = -(v_conj @ E)
            oE -= v * psi[0]
        else:
            v = v_conj = None
            out[0] = 0.0

        if basis.max_exc == 2 and basis.n_pairs:
            if env == 0.0:
                v = v_conj = self._u  # unused placeholders with has_drive False
            pair_block_apply(
                basis.pairs_view(psi),
                basis.pair_i,
                basis.pair_j,
                self._W,
                self._diag_pairs,
                self._bg_pairs,
                complex(self.rabi),
                v,
                v_conj,
                np.ascontiguousarray(E),
                np.ascontiguousarray(S),
                env != 0.0,
                oE,
                oS,
                basis.pairs_view(out),
            )

        o_sing[:, 0] = oE
        o_sing[:, 1] = oS
        return out

    # -- structure helpers ----------------------------------------------------

    def diagonal(self) -> np.ndarray:
        """Analytic diagonal of the operator (used for preconditioning)."""
        basis = self.basis
        d = np.zeros(basis.dimension, dtype=np.complex128)
        de = self._diag_e + np.diag(self._W)
        sing = basis.singles_view(d)
        sing[:, 0] = de
        sing[:, 1] = self._diag_s
        if basis.max_exc == 2 and basis.n_pairs:
            i, j = basis.pair_i, basis.pair_j
            pairs = basis.pairs_view(d)
            pairs[:, 0] = de[i] + de[j]
            pairs[:, 1] = de[i] + self._diag_s
            pairs[:, 2] = de[j] + self._diag_s
            pairs[:, 3] = 2.0 * self._diag_s
        return d

    def block_slice(self, n_exc: int) -> slice:
        """Index slice of the fixed-excitation-number block."""
        basis = self.basis
        if n_exc == 0:
            return slice(0, 1)
        if n_exc == 1:
            return slice(basis.singles_offset, basis.pairs_offset)
        if n_exc == 2 and basis.max_exc == 2:
            return slice(basis.pairs_offset, basis.dimension)
        raise ValueError(f"no block with {n_exc} excitations in this basis")

    def block_matvec(self, n_exc: int):
        """Drive-free matvec restricted to one excitation-number block.

        The drive is the only term changing the excitation count, so with it
        off the block is invariant and the restriction is well defined.
        """
        sl = self.block_slice(n_exc)
        dim = sl.stop - sl.start

        def matvec(x: np.ndarray) -> np.ndarray:
            psi = self.basis.zeros()
            psi[sl] = x
            return self._apply(psi, 0.0)[sl]

        matvec.dim = dim
        matvec.sl = sl
        return matvec


def waveguide_block(n_atoms: int, gamma_1d: float, ka: float) -> np.ndarray:
    """Dense single-excitation guided-mode block -i(g/2) exp(i ka |m - n|).

    This N x N complex-symmetric matrix is the collective-decay workhorse:
    its eigenvectors are the super- and subradiant modes, and with a rescaled
    rate it doubles as the effective two-level Hamiltonian of the
    single-excitation master equation.
    """
    pos = np.arange(n_atoms, dtype=float)
    dist = np.abs(pos[:, None] - pos[None, :])
    return -0.5j * gamma_1d * np.exp(1j * ka * dist)


def assemble_hamiltonian(
    params: PhysicalParams, drive: DriveSpec, basis: TwoExcitationBasis
) -> SpinHamiltonian:
    """Uniform chain: every atom couples to waveguide, drive and control."""
    return SpinHamiltonian(params, drive, basis)


def assemble_with_gate_ancilla(
    params: PhysicalParams, drive: DriveSpec, max_exc: int = 2
):
    """Chain of ``params.n_atoms`` scatterers plus one decoupled gate holder.

    The extra atom is appended after the chain with zero waveguide and
    free-space rates and no drive coupling; it interacts with chain atom
    ``m`` only through the band-gap exchange with sign ``(-1)**(m+1) *
    coupling_j`` (atom 1 couples at ``+coupling_j``).  Returns the operator,
    the enlarged basis and the 1-based index of the ancilla.
    """
    n = params.n_atoms
    big = PhysicalParams(
        n_atoms=n + 1,
        gamma_1d=params.gamma_1d,
        gamma_prime=params.gamma_prime,
        coupling_j=params.coupling_j,
        rabi=params.rabi,
        delta_c=params.delta_c,
        ka=params.ka,
        kappa=params.kappa,
        range_l=np.inf,
        gamma_deph=params.gamma_deph,
    )
    basis = build_basis(n + 1, max_exc)
    g1d = np.concatenate((np.full(n, params.gamma_1d), [0.0]))
    gp = np.concatenate((np.full(n, params.gamma_prime), [0.0]))
    mask = np.concatenate((np.ones(n), [0.0]))
    # odd parity slot for the ancilla puts +coupling_j on atom 1
    parity = np.concatenate((np.arange(1, n + 1), [1]))
    ham = SpinHamiltonian(
        big,
        drive,
        basis,
        gamma_1d_atoms=g1d,
        gamma_prime_atoms=gp,
        drive_mask=mask,
        bg_parity=parity,
    )
    return ham, basis, n + 1


def ancilla_gate_eigenstate(ham: SpinHamiltonian, ancilla: int, branch: str):
    """Stationary dressed gate state held by the ancilla atom.

    The ancilla's single-excitation pair (e, s) is an invariant 2 x 2 block
    of the drive-free Hamiltonian (the control field mixes the two levels,
    nothing couples them to the chain without a probe photon).  Returns the
    eigenstate dominated by the requested branch, embedded in the full
    basis, together with its (real) eigenvalue.
    """
    if branch not in ("e", "s"):
        raise ValueError(f"branch must be 'e' or 's', got {branch!r}")
    a = ancilla - 1
    h2 = np.array(
        [
            [ham._diag_e[a] + ham._W[a, a], -ham.rabi],
            [-ham.rabi, ham._diag_s],
        ],
        dtype=np.complex128,
    )
    vals, vecs = np.linalg.eig(h2)
    which = 0 if branch == "e" else 1
    pick = int(np.argmax(np.abs(vecs[which, :])))
    lam = vals[pick]
    vec = vecs[:, pick]
    vec = vec / np.linalg.norm(vec)
    psi = ham.basis.zeros()
    sing = ham.basis.singles_view(psi)
    sing[a, 0] = vec[0]
    sing[a, 1] = vec[1]
    return psi, lam
