"""Time evolution, weak-drive steady states and the dephasing master equation.

Wavefunction evolution integrates the Schroedinger equation with the
non-Hermitian chain Hamiltonian by fixed-step fourth-order Runge-Kutta:
deterministic, reproducible trajectories whose convergence is checked by
halving the step.  Quantum jumps are omitted; dissipation only shows up as
norm decay, and the recorded norm is the jump bookkeeping.

Weak-drive steady states are solved order by order in the drive amplitude.
With the zeroth-order state an eigenstate (the ground state, or a stationary
dressed gate), the amplitudes of order q satisfy::

    (lambda_0 - H_undriven) psi_q = V_drive psi_{q-1}

restricted to the block with q more excitations.  The block solves are
matrix-free GMRES with Jacobi preconditioning and a hard residual target.

The dephasing master equation is only ever needed in the single-excitation
manifold of an effective two-level chain::

    drho/dt = -i (H rho - rho H+) - gamma (rho - diag rho)

and is integrated either by the same RK4 (short windows) or spectrally via
one dense Liouvillian eigendecomposition (the route to the very long
subradiant-decay windows).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from wqed._kernels import axpy, rk4_combine
from wqed._threads import single_thread_blas
from wqed.errors import (
    DimensionMismatchError,
    StepSizeError,
    SteadyStateError,
)
from wqed.hamiltonian import SpinHamiltonian
from wqed.params import DriveSpec, PhysicalParams

NORM_GROWTH_TOL = 1e-6


def max_rate(params: PhysicalParams, drive: DriveSpec) -> float:
    """Fastest frequency scale of the rotating-frame dynamics."""
    return max(
        abs(drive.detuning),
        abs(params.delta_c) + abs(params.coupling_j),
        abs(params.rabi),
        params.n_atoms * params.gamma_1d,
        1.0,
    )


def suggested_dt(params: PhysicalParams, drive: DriveSpec) -> float:
    """Step satisfying dt <= 0.1 / (fastest rate)."""
    return 0.1 / max_rate(params, drive)


@dataclass
class Trajectory:
    """Uniformly sampled scalar records of one evolution.

    ``data`` always carries ``norm_sq``, ``p_e_tot`` and ``p_s_tot``;
    intensity records and other extras appear under the recorder names the
    caller supplied.  ``snapshots`` maps requested times to state copies.
    """

    times: np.ndarray
    data: dict
    dt: float
    snapshots: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return self.data[name]

    @property
    def p_total(self) -> np.ndarray:
        return self.data["p_e_tot"] + self.data["p_s_tot"]


def evolve(
    ham: SpinHamiltonian,
    psi0: np.ndarray,
    t_end: float,
    dt: float,
    *,
    record_stride: int = 1,
    recorders: Mapping[str, Callable] | None = None,
    snapshot_times=(),
    check_norm: bool = True,
) -> Trajectory:
    """Fixed-step RK4 integration of dpsi/dt = -i H(t) psi.

    ``recorders`` maps names to callables ``f(psi, t) -> float`` evaluated at
    every recorded step.  Norm growth beyond tolerance aborts with
    :class:`StepSizeError` (with the drive off the norm can only decay).
    """
    basis = ham.basis
    basis.check_state(psi0)
    if dt <= 0:
        raise ValueError("dt must be positive")
    n_steps = max(1, int(round(t_end / dt)))
    if n_steps % record_stride:
        n_steps += record_stride - (n_steps % record_stride)
    n_records = n_steps // record_stride + 1

    drive_off = ham.drive.amplitude == 0.0
    recorders = dict(recorders or {})
    names = ["norm_sq", "p_e_tot", "p_s_tot", *recorders.keys()]
    out = {name: np.empty(n_records) for name in names}
    times = np.empty(n_records)
    snapshot_times = sorted(float(t) for t in snapshot_times)
    snapshots = {}

    sing = basis.singles_view  # local alias
    if basis.max_exc == 2 and basis.n_pairs:
        pairs_of = basis.pairs_view

    def populations(psi):
        s = sing(psi)
        pe = float(np.sum(np.abs(s[:, 0]) ** 2))
        ps = float(np.sum(np.abs(s[:, 1]) ** 2))
        if basis.max_exc == 2 and basis.n_pairs:
            pr = pairs_of(psi)
            a = np.abs(pr) ** 2
            pe += float(2.0 * a[:, 0].sum() + a[:, 1].sum() + a[:, 2].sum())
            ps += float(2.0 * a[:, 3].sum() + a[:, 1].sum() + a[:, 2].sum())
        return pe, ps

    def record(k, psi, t):
        out["norm_sq"][k] = float(np.vdot(psi, psi).real)
        pe, ps = populations(psi)
        out["p_e_tot"][k] = pe
        out["p_s_tot"][k] = ps
        for name, fn in recorders.items():
            out[name][k] = fn(psi, t)
        times[k] = t

    psi = np.array(psi0, dtype=np.complex128, copy=True)
    record(0, psi, 0.0)
    norm_prev = out["norm_sq"][0]
    norm_budget = norm_prev * (1.0 + NORM_GROWTH_TOL) if drive_off else max(norm_prev, 1.0) * 1.5
    next_snap = 0

    t = 0.0
    half = 0.5 * dt
    stage = np.empty_like(psi)
    with single_thread_blas():
        for step in range(1, n_steps + 1):
            k1 = -1j * ham._apply(psi, ham.drive.envelope(t))
            axpy(stage, psi, half, k1)
            k2 = -1j * ham._apply(stage, ham.drive.envelope(t + half))
            axpy(stage, psi, half, k2)
            k3 = -1j * ham._apply(stage, ham.drive.envelope(t + half))
            axpy(stage, psi, dt, k3)
            k4 = -1j * ham._apply(stage, ham.drive.envelope(t + dt))
            rk4_combine(psi, k1, k2, k3, k4, dt / 6.0)
            t = step * dt

            while next_snap < len(snapshot_times) and snapshot_times[next_snap] <= t + 1e-12:
                snapshots[snapshot_times[next_snap]] = psi.copy()
                next_snap += 1

            if step % record_stride == 0:
                k = step // record_stride
                record(k, psi, t)
                if check_norm:
                    norm_now = out["norm_sq"][k]
                    if drive_off and norm_now > norm_prev * (1.0 + NORM_GROWTH_TOL):
                        raise StepSizeError(
                            f"norm grew from {norm_prev:.12g} to {norm_now:.12g} at t={t:.6g}; "
                            f"dt={dt:g} too large (suggest <= {suggested_dt(ham.params, ham.drive):g})"
                        )
                    if norm_now > norm_budget:
                        raise StepSizeError(
                            f"norm {norm_now:.6g} exceeded budget at t={t:.6g}; dt={dt:g} unstable"
                        )
                    norm_prev = norm_now

    return Trajectory(times=times, data=out, dt=dt * record_stride, snapshots=snapshots)


# -- weak-drive steady state -------------------------------------------------


@dataclass
class SteadyState:
    """Order-by-order weak-drive steady state.

    ``psi`` is the summed state; ``components[q]`` the order-q amplitudes
    (component 0 is the ground or gate state).  With a gate, order q lives in
    the block with q extra excitations on top of it.
    """

    psi: np.ndarray
    components: list
    lambda0: complex
    info: dict = field(default_factory=dict)


def _solve_block(ham: SpinHamiltonian, n_exc: int, lambda0: complex, source: np.ndarray, rtol: float):
    """Matrix-free GMRES solve of (lambda0 - H)|block x = source|block."""
    matvec = ham.block_matvec(n_exc)
    sl = matvec.sl
    b = source[sl]
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return np.zeros_like(b), {"iterations": 0, "residual": 0.0}

    def op(x):
        return lambda0 * x - matvec(x)

    dim = matvec.dim
    A = spla.LinearOperator((dim, dim), matvec=op, dtype=np.complex128)
    diag = lambda0 - ham.diagonal()[sl]
    small = np.abs(diag) < 1e-8
    diag[small] = 1.0
    M = spla.LinearOperator((dim, dim), matvec=lambda x: x / diag, dtype=np.complex128)

    iters = [0]

    def count(_):
        iters[0] += 1

    atol = rtol * b_norm
    with single_thread_blas():
        x, info = spla.gmres(
            A, b, rtol=0.0, atol=atol, restart=min(dim, 160), maxiter=60, M=M, callback=count,
            callback_type="pr_norm",
        )
        residual = np.linalg.norm(op(x) - b)
    if residual > rtol * b_norm * 10:
        raise SteadyStateError(
            f"block-{n_exc} solve stalled: residual {residual:.3e} vs target {rtol * b_norm:.3e} "
            f"after {iters[0]} iterations (gmres info={info}); "
            "the drive may sit on a lossless dark resonance"
        )
    return x, {"iterations": iters[0], "residual": float(residual)}


def steady_state_weak_drive(
    ham: SpinHamiltonian,
    *,
    order: int = 2,
    gate: tuple | None = None,
    rtol: float = 1e-10,
) -> SteadyState:
    """Hierarchical steady state of a weak cw drive.

    Without a gate the zeroth order is the ground state (amplitude pinned to
    one) and orders one and two fill the single- and two-excitation blocks.
    With ``gate=(psi_gate, lambda_gate)`` (a stationary eigenstate, e.g. the
    dressed ancilla state) the probe response is solved in the block with one
    extra excitation; second order is not representable within the
    two-excitation truncation then.
    """
    if ham.drive.kind != "cw":
        raise ValueError("steady state requires a cw drive")
    if ham.drive.amplitude <= 0.0:
        raise ValueError("steady state requires a nonzero drive amplitude")
    basis = ham.basis
    info = {}

    if gate is None:
        lambda0 = 0.0 + 0.0j
        comp0 = basis.ground_state()
        base_exc = 0
    else:
        comp0, lambda0 = gate
        basis.check_state(comp0)
        residual = np.linalg.norm(ham.apply_no_drive(comp0) - lambda0 * comp0)
        if residual > 1e-8:
            raise SteadyStateError(
                f"gate state is not stationary (eigen-residual {residual:.3e}); "
                "use a dressed eigenstate"
            )
        base_exc = 1
        if order > 1:
            raise ValueError("with a gate excitation only first order fits the truncation")
    if base_exc + order > basis.max_exc:
        raise ValueError(
            f"order {order} on top of {base_exc} excitations exceeds max_exc={basis.max_exc}"
        )

    env = ham.drive.amplitude
    components = [comp0]
    for q in range(1, order + 1):
        source = ham.apply_drive_only(components[-1], env)
        x, stats = _solve_block(ham, base_exc + q, lambda0, source, rtol)
        comp = basis.zeros()
        comp[ham.block_slice(base_exc + q)] = x
        components.append(comp)
        info[f"order{q}"] = stats

    psi = np.sum(components, axis=0)
    return SteadyState(psi=psi, components=components, lambda0=lambda0, info=info)


# -- single-excitation master equation ----------------------------------------


@dataclass
class DensityBlock:
    """Single-excitation density matrix plus recycled ground population."""

    rho: np.ndarray
    ground: float = 0.0

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=np.complex128)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionMismatchError("rho must be square")
        herm = np.max(np.abs(rho - rho.conj().T))
        scale = max(np.max(np.abs(rho)), 1e-300)
        if herm > 1e-10 * scale:
            raise ValueError(f"rho is not Hermitian (deviation {herm:.3e})")
        self.rho = rho

    @classmethod
    def from_pure(cls, psi: np.ndarray) -> "DensityBlock":
        psi = np.asarray(psi, dtype=np.complex128)
        return cls(np.outer(psi, psi.conj()))

    @property
    def excited_trace(self) -> float:
        return float(np.trace(self.rho).real)


def _lindblad_rhs(h_nh: np.ndarray, rho: np.ndarray, gamma: float):
    comm = h_nh @ rho - rho @ h_nh.conj().T
    drho = -1j * comm
    if gamma:
        drho -= gamma * rho
        drho[np.diag_indices_from(rho)] += gamma * np.diag(rho)
    flux = 2.0 * float(np.imag(np.trace(h_nh @ rho)))  # d trace / dt (<= 0)
    return drho, flux


def evolve_density_single_exc(
    h_nh: np.ndarray,
    rho0: DensityBlock,
    gamma: float,
    t_end: float,
    dt: float,
    *,
    record_stride: int = 1,
    method: str = "rk4",
) -> Trajectory:
    """Integrate the dephasing master equation on the single-excitation block.

    ``h_nh`` is the (effective two-level) non-Hermitian block, typically
    :func:`wqed.hamiltonian.waveguide_block` at a rescaled rate.  Records the
    excited trace and the recycled ground population.  ``method='spectral'``
    evaluates the exact propagator through one dense Liouvillian
    eigendecomposition instead of stepping (exact for this linear,
    time-independent equation; the only route to subradiant time scales).
    """
    if not isinstance(rho0, DensityBlock):
        raise TypeError("rho0 must be a DensityBlock")
    n = rho0.rho.shape[0]
    if h_nh.shape != (n, n):
        raise DimensionMismatchError("h_nh and rho0 disagree on dimension")
    if method == "spectral":
        evaluator = liouvillian_trace_evaluator(h_nh, rho0.rho, gamma)
        n_records = max(2, int(round(t_end / (dt * record_stride))) + 1)
        times = np.arange(n_records) * dt * record_stride
        trace = evaluator(times)
        tr0 = trace[0]
        data = {
            "norm_sq": trace.copy(),
            "p_e_tot": trace.copy(),
            "p_s_tot": np.zeros_like(trace),
            "excited_trace": trace,
            "ground": rho0.ground + tr0 - trace,
        }
        return Trajectory(times=times, data=data, dt=dt * record_stride, meta={"method": "spectral"})

    if method != "rk4":
        raise ValueError(f"unknown method {method!r}")
    n_steps = max(1, int(round(t_end / dt)))
    if n_steps % record_stride:
        n_steps += record_stride - (n_steps % record_stride)
    n_records = n_steps // record_stride + 1
    times = np.empty(n_records)
    trace = np.empty(n_records)
    ground = np.empty(n_records)

    rho = rho0.rho.copy()
    g = rho0.ground
    times[0] = 0.0
    trace[0] = float(np.trace(rho).real)
    ground[0] = g
    half = 0.5 * dt
    for step in range(1, n_steps + 1):
        k1, f1 = _lindblad_rhs(h_nh, rho, gamma)
        k2, f2 = _lindblad_rhs(h_nh, rho + half * k1, gamma)
        k3, f3 = _lindblad_rhs(h_nh, rho + half * k2, gamma)
        k4, f4 = _lindblad_rhs(h_nh, rho + dt * k3, gamma)
        rho += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        g -= (dt / 6.0) * (f1 + 2.0 * (f2 + f3) + f4)  # ground gains what the block loses
        if step % record_stride == 0:
            k = step // record_stride
            times[k] = step * dt
            trace[k] = float(np.trace(rho).real)
            ground[k] = g

    data = {
        "norm_sq": trace.copy(),
        "p_e_tot": trace.copy(),
        "p_s_tot": np.zeros_like(trace),
        "excited_trace": trace,
        "ground": ground,
    }
    return Trajectory(times=times, data=data, dt=dt * record_stride, meta={"method": "rk4"})


def pure_state_trace_evaluator(h_nh: np.ndarray, psi0: np.ndarray):
    """Vectorized t -> ||exp(-i H t) psi0||^2 through one N x N eig."""
    vals, vecs = scipy.linalg.eig(h_nh)
    w = np.linalg.solve(vecs, psi0)
    gram = vecs.conj().T @ vecs

    def trace(t):
        t = np.atleast_1d(np.asarray(t, float))
        phases = np.exp(-1j * np.outer(t, vals)) * w  # (T, N)
        out = np.einsum("ti,ij,tj->t", phases.conj(), gram, phases)
        return np.real(out)

    return trace


def liouvillian_trace_evaluator(h_nh: np.ndarray, rho0: np.ndarray, gamma: float):
    """Vectorized t -> trace(rho(t)) through one dense Liouvillian eig.

    For gamma = 0 this reduces to the pure-state evaluator when rho0 is a
    projector, but the general path works for any Hermitian rho0.
    """
    n = h_nh.shape[0]
    if gamma == 0.0:
        vals, vecs = scipy.linalg.eigh(rho0)
        keep = vals > 1e-14 * max(vals.max(), 1e-300)
        evaluators = [
            (float(vals[i]), pure_state_trace_evaluator(h_nh, vecs[:, i]))
            for i in np.nonzero(keep)[0]
        ]

        def trace(t):
            t = np.atleast_1d(np.asarray(t, float))
            out = np.zeros(len(t))
            for weight, ev in evaluators:
                out += weight * ev(t)
            return out

        return trace

    eye = np.eye(n)
    L = -1j * (np.kron(h_nh, eye) - np.kron(eye, h_nh.conj()))
    L -= gamma * np.eye(n * n)
    diag_slots = np.arange(n) * n + np.arange(n)
    L[diag_slots, diag_slots] += gamma
    vals, vecs = scipy.linalg.eig(L, check_finite=False)
    w = np.linalg.solve(vecs, rho0.reshape(-1))
    # trace of each eigen-matrix
    tr = vecs[diag_slots, :].sum(axis=0)
    c = tr * w

    def trace(t):
        t = np.atleast_1d(np.asarray(t, float))
        return np.real(np.exp(np.outer(t, vals)) @ c)

    return trace
