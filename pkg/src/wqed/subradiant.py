"""Collective decay modes, gate-state construction and decay-rate fits.

The guided-mode block of the single-excitation manifold is an N x N complex
symmetric matrix whose eigenvectors split into a handful of superradiant
modes and many subradiant ones.  The gate photon is stored in the most
subradiant mode, transplanted onto the storage level (substituting the
excited-state amplitudes one-to-one), where it only decays through the small
excited-state admixture the control field creates.

For quarter-wave spacing the two most subradiant modes are degenerate in
decay rate and sit at momenta 0 and pi; the gate construction picks the
pi-centred one (the momentum the write-and-shift protocol produces).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from wqed.errors import InsufficientDataError, WindowTooShortError
from wqed.hamiltonian import waveguide_block
from wqed.params import PhysicalParams


@dataclass(frozen=True)
class EigenMode:
    """One collective mode of the guided-emission block."""

    eigenvalue: complex
    vector: np.ndarray
    decay_rate: float  # -2 Im(eigenvalue)
    k_centroid: float  # peak of the momentum profile, in (-pi, pi]


def momentum_profile(vector: np.ndarray):
    """Discrete Fourier profile (k_grid, |c_k|) of a chain mode."""
    n = len(vector)
    c = np.fft.fft(vector) / math.sqrt(n)
    k = 2.0 * math.pi * np.fft.fftfreq(n)
    order = np.argsort(k)
    k = k[order]
    c = np.abs(c[order])
    # map k = -pi to +pi for an (exclusive, inclusive] window
    k = np.where(k <= -math.pi + 1e-12, k + 2 * math.pi, k)
    order = np.argsort(k)
    return k[order], c[order]


def momentum_centroid(vector: np.ndarray) -> float:
    k, c = momentum_profile(vector)
    return float(k[int(np.argmax(c))])


def single_excitation_eigenmodes(p: PhysicalParams) -> list[EigenMode]:
    """All collective modes, sorted by decay rate (most subradiant first)."""
    if p.n_atoms > 1000:
        raise ValueError("dense eigenproblem capped at 1000 atoms")
    h = waveguide_block(p.n_atoms, p.gamma_1d, p.phase_per_site)
    vals, vecs = scipy.linalg.eig(h)
    scale = max(np.max(np.abs(vals)), 1e-300)
    residual = np.max(np.linalg.norm(h @ vecs - vecs * vals[None, :], axis=0))
    if residual > 1e-10 * scale * math.sqrt(p.n_atoms):
        raise np.linalg.LinAlgError(
            f"eigen-decomposition residual {residual:.3e} exceeds tolerance "
            f"(scale {scale:.3e})"
        )
    modes = []
    for i in range(len(vals)):
        v = vecs[:, i] / np.linalg.norm(vecs[:, i])
        modes.append(
            EigenMode(
                eigenvalue=complex(vals[i]),
                vector=v,
                decay_rate=float(-2.0 * vals[i].imag),
                k_centroid=momentum_centroid(v),
            )
        )
    modes.sort(key=lambda m: m.decay_rate)
    return modes


@dataclass(frozen=True)
class GateState:
    """Stored gate excitation in the storage manifold.

    ``amplitudes`` are the per-atom storage-level amplitudes (unit norm);
    the ``ancilla`` kind carries no chain state, only the flag consumed by
    the transfer-matrix and scenario layers.
    """

    kind: str
    amplitudes: np.ndarray | None
    nominal_decay: float

    KINDS = ("subradiant", "single-site", "ancilla")


def build_gate_state(p: PhysicalParams, kind: str, site: int | None = None) -> GateState:
    """Construct the gate state to be stored in the chain.

    ``subradiant``: most subradiant guided mode, transplanted onto the
    storage level, picking the pi-centred member of the degenerate pair.
    ``single-site``: bare product state on atom ``site`` (defaults to the
    middle of the chain).  ``ancilla``: flag only.
    """
    if kind not in GateState.KINDS:
        raise ValueError(f"unknown gate kind {kind!r}")
    if kind == "ancilla":
        return GateState(kind=kind, amplitudes=None, nominal_decay=0.0)
    if kind == "single-site":
        m = (p.n_atoms + 1) // 2 if site is None else site
        if not 1 <= m <= p.n_atoms:
            raise ValueError(f"site {m} outside chain 1..{p.n_atoms}")
        amps = np.zeros(p.n_atoms, dtype=np.complex128)
        amps[m - 1] = 1.0
        return GateState(kind=kind, amplitudes=amps, nominal_decay=p.gamma_1d)
    modes = single_excitation_eigenmodes(p)
    if p.n_atoms == 1:
        pick = modes[0]
    else:
        pair = modes[:2]
        pick = max(pair, key=lambda m: abs(m.k_centroid))
    return GateState(kind=kind, amplitudes=pick.vector.copy(), nominal_decay=pick.decay_rate)


def embed_gate(gate: GateState, basis) -> np.ndarray:
    """Gate state as a full basis vector on the storage manifold."""
    if gate.amplitudes is None:
        raise ValueError("ancilla gates carry no chain state")
    if len(gate.amplitudes) != basis.n_atoms:
        raise ValueError("gate amplitudes do not match the basis chain length")
    return basis.embed_singles(s_amps=gate.amplitudes)


def decay_rate_from_trajectory(
    traj, *, long_time: bool = False, transient_fraction: float = 0.05
) -> float:
    """Inverse 1/e-decay time of the total excited population.

    ``long_time`` excludes the initial ``transient_fraction`` of the window
    and measures the 1/e time of the remaining record relative to its start.
    """
    times = traj.times
    pop = traj.p_total
    start = 0
    if long_time:
        start = int(math.ceil(transient_fraction * (len(times) - 1)))
    p0 = pop[start]
    if p0 <= 0.0:
        raise WindowTooShortError("population already zero at the window start")
    target = p0 / math.e
    below = np.nonzero(pop[start:] <= target)[0]
    if len(below) == 0:
        raise WindowTooShortError(
            f"population never fell to 1/e of {p0:.3g} within the recorded window"
        )
    i = below[0] + start
    if i == start:
        raise WindowTooShortError("population starts below the 1/e target")
    # linear interpolation between the bracketing samples
    t_hi, t_lo = times[i], times[i - 1]
    p_hi, p_lo = pop[i], pop[i - 1]
    t_cross = t_lo + (p_lo - target) * (t_hi - t_lo) / (p_lo - p_hi)
    return 1.0 / (t_cross - times[start])


@dataclass(frozen=True)
class ScalingFit:
    """Log-log power-law fit of decay rate against atom number."""

    alpha: float  # decay_rate ~ prefactor * N**(-alpha)
    prefactor: float
    residual: float  # rms deviation in log10
    polynomial: bool  # residual below the non-polynomial flag threshold


def fit_scaling(points, threshold: float = 0.01) -> ScalingFit:
    """Least-squares power-law fit of (N, decay_rate) pairs.

    ``residual`` is the rms log10 misfit; ``polynomial`` is False when it
    exceeds ``threshold``, flagging visibly non-power-law data.  The default
    threshold (0.01 decades, about 2 percent pointwise) sits an order of
    magnitude above the residual of clean collective-decay power laws and a
    factor of a few below the curvature a small dephasing floor introduces.
    """
    points = list(points)
    if len(points) < 3:
        raise InsufficientDataError(f"need at least 3 points, got {len(points)}")
    n = np.array([float(q[0]) for q in points])
    g = np.array([float(q[1]) for q in points])
    if np.any(n <= 0) or np.any(g <= 0):
        raise ValueError("atom numbers and rates must be positive for a log-log fit")
    x = np.log10(n)
    y = np.log10(g)
    slope, intercept = np.polyfit(x, y, 1)
    res = y - (slope * x + intercept)
    rms = float(np.sqrt(np.mean(res**2)))
    return ScalingFit(
        alpha=float(-slope),
        prefactor=float(10.0**intercept),
        residual=rms,
        polynomial=rms <= threshold,
    )
