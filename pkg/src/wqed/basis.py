"""Truncated Hilbert space of the atom chain: at most two excitations.

The kept configurations are the global ground state, the single excitations
``e_m`` / ``s_m``, and the two-excitation states ``e_m e_n``, ``e_m s_n``,
``s_m e_n``, ``s_m s_n`` on distinct atoms ``m < n``.  No atom ever holds two
excitations, so the dimension is::

    1 + 2 N + 4 * C(N, 2)  =  1 + 2 N + 2 N (N - 1)

States are plain 1-D complex numpy arrays over this enumeration; the basis
object owns the index bookkeeping and the block layout used by the
matrix-free Hamiltonian apply.

Enumeration order (deterministic):

* index 0: ground;
* singles, grouped by atom ``m = 1..N`` with ``e`` before ``s``;
* pairs ``(m, n)`` with ``m < n`` in lexicographic order, each contributing
  the four level combinations ``(ee, es, se, ss)`` in that order, where the
  first letter is the level of atom ``m``.
"""

from __future__ import annotations

import numpy as np

from wqed.errors import DimensionMismatchError, UnsupportedTruncationError

Config = tuple


class TwoExcitationBasis:
    """Bijective map between dense indices and excitation configurations.

    Immutable after construction; shared freely between threads.
    """

    def __init__(self, n_atoms: int, max_exc: int = 2):
        if max_exc not in (1, 2):
            raise UnsupportedTruncationError(
                f"only truncations at 1 or 2 excitations are supported, got {max_exc}"
            )
        if int(n_atoms) != n_atoms or n_atoms < 1:
            raise ValueError(f"n_atoms must be a positive integer, got {n_atoms}")
        self.n_atoms = int(n_atoms)
        self.max_exc = int(max_exc)
        n = self.n_atoms
        self.n_pairs = n * (n - 1) // 2 if max_exc == 2 else 0
        self.singles_offset = 1
        self.pairs_offset = 1 + 2 * n
        self.dimension = 1 + 2 * n + 4 * self.n_pairs
        # 0-based (i < j) atom indices of pair block p, in enumeration order.
        if self.n_pairs:
            iu = np.triu_indices(n, 1)
            self.pair_i = iu[0].astype(np.intp)
            self.pair_j = iu[1].astype(np.intp)
            # rank of pair (i, j): row offsets into the triangular enumeration
            self._row_start = np.concatenate(
                ([0], np.cumsum(np.arange(n - 1, 0, -1)))
            ).astype(np.intp)
        else:
            self.pair_i = np.empty(0, dtype=np.intp)
            self.pair_j = np.empty(0, dtype=np.intp)
            self._row_start = np.zeros(n, dtype=np.intp)

    # -- index arithmetic ---------------------------------------------------

    def pair_rank(self, m: int, n: int) -> int:
        """Rank of the unordered pair of 1-based atoms m < n."""
        i, j = m - 1, n - 1
        return int(self._row_start[i] + (j - i - 1))

    def index_of(self, config: Config) -> int:
        """Dense index of a configuration tuple.

        Tuples: ``("g",)``, ``("e", m)``, ``("s", m)``, ``("ee", m, n)``,
        ``("ss", m, n)`` with ``m < n``, and ``("es", a, b)`` meaning the
        ``e`` excitation on atom ``a`` and the ``s`` excitation on atom ``b``.
        """
        kind = config[0]
        if kind == "g":
            return 0
        if kind in ("e", "s"):
            m = config[1]
            self._check_atom(m)
            return self.singles_offset + 2 * (m - 1) + (0 if kind == "e" else 1)
        if self.max_exc < 2:
            raise UnsupportedTruncationError(f"no two-excitation states in a max_exc=1 basis: {config}")
        if kind == "ee" or kind == "ss":
            m, n = config[1], config[2]
            self._check_pair(m, n)
            slot = 0 if kind == "ee" else 3
            return self.pairs_offset + 4 * self.pair_rank(m, n) + slot
        if kind == "es":
            a, b = config[1], config[2]
            if a == b:
                raise ValueError(f"no atom holds two excitations: {config}")
            self._check_atom(a)
            self._check_atom(b)
            if a < b:
                return self.pairs_offset + 4 * self.pair_rank(a, b) + 1
            return self.pairs_offset + 4 * self.pair_rank(b, a) + 2
        raise ValueError(f"unknown configuration {config!r}")

    def config_of(self, index: int) -> Config:
        """Configuration tuple of a dense index."""
        if not (0 <= index < self.dimension):
            raise IndexError(f"index {index} outside basis of dimension {self.dimension}")
        if index == 0:
            return ("g",)
        if index < self.pairs_offset:
            k = index - self.singles_offset
            m, level = divmod(k, 2)
            return ("e" if level == 0 else "s", m + 1)
        k = index - self.pairs_offset
        p, slot = divmod(k, 4)
        m = int(self.pair_i[p]) + 1
        n = int(self.pair_j[p]) + 1
        if slot == 0:
            return ("ee", m, n)
        if slot == 1:
            return ("es", m, n)
        if slot == 2:
            return ("es", n, m)
        return ("ss", m, n)

    def _check_atom(self, m: int) -> None:
        if not (1 <= m <= self.n_atoms):
            raise ValueError(f"atom index {m} outside 1..{self.n_atoms}")

    def _check_pair(self, m: int, n: int) -> None:
        self._check_atom(m)
        self._check_atom(n)
        if not m < n:
            raise ValueError(f"pair must be ordered m < n, got ({m}, {n})")

    # -- states and block views ---------------------------------------------

    def zeros(self) -> np.ndarray:
        return np.zeros(self.dimension, dtype=np.complex128)

    def ground_state(self) -> np.ndarray:
        psi = self.zeros()
        psi[0] = 1.0
        return psi

    def check_state(self, psi: np.ndarray) -> None:
        if psi.shape != (self.dimension,):
            raise DimensionMismatchError(
                f"state of shape {psi.shape} does not match basis dimension {self.dimension}"
            )

    def singles_view(self, psi: np.ndarray) -> np.ndarray:
        """(N, 2) view of the single-excitation block, columns (e, s)."""
        return psi[self.singles_offset : self.pairs_offset].reshape(self.n_atoms, 2)

    def pairs_view(self, psi: np.ndarray) -> np.ndarray:
        """(n_pairs, 4) view of the pair block, columns (ee, es, se, ss)."""
        return psi[self.pairs_offset :].reshape(self.n_pairs, 4)

    def embed_singles(self, e_amps=None, s_amps=None) -> np.ndarray:
        """State with the given single-excitation amplitude arrays."""
        psi = self.zeros()
        view = self.singles_view(psi)
        if e_amps is not None:
            view[:, 0] = e_amps
        if s_amps is not None:
            view[:, 1] = s_amps
        return psi

    # -- pair block <-> square matrix helpers --------------------------------

    def gather_pair_matrices(self, pairs: np.ndarray):
        """Expand the compact (P, 4) pair block into N x N matrices.

        Returns (EE, ES, SS): EE and SS symmetric with zero diagonal,
        ES[a, b] the amplitude with the e excitation on atom a (0-based) and
        the s excitation on atom b.
        """
        n = self.n_atoms
        i, j = self.pair_i, self.pair_j
        EE = np.zeros((n, n), dtype=np.complex128)
        ES = np.zeros((n, n), dtype=np.complex128)
        SS = np.zeros((n, n), dtype=np.complex128)
        EE[i, j] = pairs[:, 0]
        EE[j, i] = pairs[:, 0]
        ES[i, j] = pairs[:, 1]
        ES[j, i] = pairs[:, 2]
        SS[i, j] = pairs[:, 3]
        SS[j, i] = pairs[:, 3]
        return EE, ES, SS

    def scatter_pair_matrices(self, EE, ES, SS, out: np.ndarray) -> None:
        """Compress N x N matrices back into a (P, 4) pair block ``out``."""
        i, j = self.pair_i, self.pair_j
        out[:, 0] = EE[i, j]
        out[:, 1] = ES[i, j]
        out[:, 2] = ES[j, i]
        out[:, 3] = SS[i, j]


def build_basis(n_atoms: int, max_exc: int = 2) -> TwoExcitationBasis:
    """Enumerate the truncated basis for a chain of ``n_atoms`` atoms."""
    return TwoExcitationBasis(n_atoms, max_exc)
