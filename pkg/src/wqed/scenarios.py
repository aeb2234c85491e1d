"""Config-driven experiment runner: one scenario kind per reproduction task.

Scenario kinds:

* ``spectrum``: reflectance/transmittance sweeps, spin model and/or transfer
  matrix, with or without a stored gate excitation;
* ``g2map``: transmitted-field g2(0) and linear transmittance over a
  (detuning x exchange-coupling) grid, plus the conditional transfer-matrix
  reflectance used for the high-reflectance contour, plus optional
  double-storage population maps;
* ``pulse-switch``: time-resolved signal-pulse scattering off a decaying
  stored gate, with background subtraction;
* ``decay``: population decay of a stored gate under the full chain model;
* ``dephasing-sweep``: dephased mirror spectra against the closed-form
  prediction;
* ``optimize-t0``: deterministic pulse-width optimization of the switch;
* ``scaling``: collective decay rate against atom number and dephasing.

All file output lives here: '#'-headered tables plus one YAML manifest per
run.  Grid points are distributed over a small thread pool; results are
assembled in grid order, so outputs are bit-reproducible for a given
machine and configuration.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import math
import os
import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

import wqed
from wqed.basis import build_basis
from wqed.dynamics import (
    DensityBlock,
    Trajectory,
    evolve,
    evolve_density_single_exc,
    steady_state_weak_drive,
    suggested_dt,
)
from wqed.effective import (
    dephased_lorentzian,
    kappa_lambda_dispersive,
    phase_compensation,
    resonances,
    splitting_formula,
)
from wqed.errors import (
    BoundaryOptimumWarning,
    BudgetExceededError,
    ConfigError,
)
from wqed.hamiltonian import (
    assemble_hamiltonian,
    assemble_with_gate_ancilla,
    ancilla_gate_eigenstate,
    waveguide_block,
)
from wqed.io import popmap_to_columns, write_table
from wqed.observables import (
    g2_zero,
    intensity,
    intensity_raw,
    parity_class_weights,
    population_map,
    pulse_reflectance,
    reflection_spec,
    transmission_spec,
)
from wqed.params import DriveSpec, PhysicalParams, validate_params
from wqed.subradiant import build_gate_state, decay_rate_from_trajectory, embed_gate, fit_scaling
from wqed.transfer_matrix import cascade_spectrum, conditional_cell, uniform_cell

SCENARIO_KINDS = (
    "spectrum",
    "g2map",
    "pulse-switch",
    "decay",
    "dephasing-sweep",
    "optimize-t0",
    "scaling",
)

DEFAULT_BUDGET = 2.0e13
DEFAULT_AMPLITUDE = 1.0e-4
SOLVE_ITER_ESTIMATE = 300  # per-point budget estimate for iterative solves

PARAM_KEYS = (
    "n_atoms",
    "gamma_1d",
    "gamma_prime",
    "coupling_j",
    "rabi",
    "delta_c",
    "ka",
    "kappa",
    "range_l",
    "gamma_deph",
)


# -- configuration -------------------------------------------------------------


@dataclass
class ScenarioConfig:
    kind: str
    out: str
    params: PhysicalParams
    drive: DriveSpec
    model: str = "both"
    gate: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    budget: float = DEFAULT_BUDGET
    threads: int | None = None
    raw: dict = field(default_factory=dict)


def config_from_dict(doc: dict) -> ScenarioConfig:
    """Validate a parsed YAML document into a ScenarioConfig."""
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    kind = doc.get("kind")
    if kind not in SCENARIO_KINDS:
        raise ConfigError(f"unknown scenario kind {kind!r}; expected one of {SCENARIO_KINDS}")
    out = doc.get("out")
    if not out:
        raise ConfigError("config needs an 'out' path prefix")

    pdoc = doc.get("params") or {}
    unknown = set(pdoc) - set(PARAM_KEYS)
    if unknown:
        raise ConfigError(f"unknown params keys: {sorted(unknown)}")
    if "n_atoms" not in pdoc:
        raise ConfigError("params.n_atoms is required")
    if "range_l" in pdoc and pdoc["range_l"] in ("inf", None):
        pdoc = dict(pdoc, range_l=math.inf)
    try:
        params = PhysicalParams(**pdoc)
    except TypeError as exc:
        raise ConfigError(f"bad params block: {exc}") from exc
    report = validate_params(params, warn=False)
    if not report.ok:
        raise ConfigError("; ".join(report.violations))
    for msg in report.warnings:
        warnings.warn(msg, stacklevel=2)

    ddoc = doc.get("drive") or {}
    pulse_width = ddoc.get("pulse_width")
    if kind == "optimize-t0" and pulse_width is None:
        # the width is the optimization variable; seed it with the upper bound
        t0_spec = (doc.get("sweep") or {}).get("t0") or {}
        pulse_width = t0_spec.get("max")
    try:
        drive = DriveSpec(
            kind=ddoc.get("kind", "cw"),
            amplitude=float(ddoc.get("amplitude", DEFAULT_AMPLITUDE)),
            detuning=float(ddoc.get("detuning", 0.0)),
            pulse_width=pulse_width,
        )
    except ValueError as exc:
        raise ConfigError(f"bad drive block: {exc}") from exc

    model = doc.get("model", "both")
    if model not in ("spin-model", "transfer-matrix", "both"):
        raise ConfigError(f"unknown model selector {model!r}")
    gate = doc.get("gate") or {}
    if gate.get("kind") not in (None, "none", "ancilla", "subradiant", "single-site"):
        raise ConfigError(f"unknown gate kind {gate.get('kind')!r}")

    sweep = doc.get("sweep") or {}
    threads = doc.get("threads")
    return ScenarioConfig(
        kind=kind,
        out=str(out),
        params=params,
        drive=drive,
        model=model,
        gate=gate,
        sweep=sweep,
        options=doc.get("options") or {},
        budget=float(doc.get("budget", DEFAULT_BUDGET)),
        threads=int(threads) if threads is not None else None,
        raw=doc,
    )


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    return config_from_dict(doc)


def parse_grid(spec, name: str) -> np.ndarray:
    """Grid axis: either an explicit list or {start, stop, points}."""
    if spec is None:
        raise ConfigError(f"sweep axis {name!r} is required for this scenario")
    if isinstance(spec, dict):
        missing = {"start", "stop", "points"} - set(spec)
        if missing:
            raise ConfigError(f"sweep axis {name!r} needs start/stop/points (missing {sorted(missing)})")
        pts = int(spec["points"])
        if pts < 1:
            raise ConfigError(f"sweep axis {name!r}: points must be >= 1")
        grid = np.linspace(float(spec["start"]), float(spec["stop"]), pts)
    else:
        grid = np.asarray(list(spec), dtype=float)
    if grid.size == 0:
        raise ConfigError(f"sweep axis {name!r} is empty")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ConfigError(f"sweep axis {name!r} must be strictly increasing")
    return grid


def resolve_threads(cfg: ScenarioConfig) -> int:
    if cfg.threads is not None:
        return max(1, cfg.threads)
    env = os.environ.get("WQED_THREADS")
    if env:
        return max(1, int(env))
    return min(2, os.cpu_count() or 1)


def _pool_map(fn, items, threads: int):
    """Map preserving order; a worker pool only when it can pay off."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# -- manifest ------------------------------------------------------------------


@dataclass
class OutputManifest:
    run_id: str
    scenario: str
    code_version: str
    wall_clock_s: float
    config: dict
    files: list
    summary: dict
    path: str = ""

    def write(self, path) -> str:
        doc = {
            "run_id": self.run_id,
            "scenario": self.scenario,
            "code_version": self.code_version,
            "wall_clock_s": self.wall_clock_s,
            "config": self.config,
            "files": self.files,
            "summary": self.summary,
        }
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(doc, fh, sort_keys=True)
        self.path = str(path)
        return self.path


def _run_id(cfg: ScenarioConfig) -> str:
    # identifies the physics configuration: output location, threading and
    # budget do not change any number
    doc = {k: v for k, v in cfg.raw.items() if k not in ("out", "threads", "budget")}
    blob = yaml.safe_dump(_jsonable(doc), sort_keys=True).encode()
    return f"{cfg.kind}-{hashlib.sha1(blob).hexdigest()[:12]}"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


# -- budget guard ---------------------------------------------------------------


def _two_exc_dim(n: int) -> int:
    return 1 + 2 * n + 2 * n * (n - 1)


def estimate_cost(cfg: ScenarioConfig) -> float:
    """Coarse operation-count estimate used by the budget guard.

    Units: elementary amplitude updates (one operator application costs
    about n_atoms * dimension of them).
    """
    n = cfg.params.n_atoms
    kind = cfg.kind
    if kind == "spectrum":
        pts = len(parse_grid(cfg.sweep.get("delta"), "delta"))
        if cfg.model == "transfer-matrix":
            return 1e4 * pts * n
        gated = cfg.gate.get("kind") not in (None, "none")
        dim = _two_exc_dim(n + 1) if gated else (1 + 2 * n)
        return float(dim) * n * SOLVE_ITER_ESTIMATE * pts
    if kind == "g2map":
        pts = len(parse_grid(cfg.sweep.get("delta_offset"), "delta_offset")) * len(
            parse_grid(cfg.sweep.get("coupling_j"), "coupling_j")
        )
        return float(_two_exc_dim(n)) * n * 2 * SOLVE_ITER_ESTIMATE * pts
    if kind in ("pulse-switch", "optimize-t0"):
        t0 = cfg.drive.pulse_width or float(np.max(parse_grid(cfg.sweep.get("t0"), "t0")))
        tail = float(cfg.options.get("tail", 3.0))
        dt = suggested_dt(cfg.params, cfg.drive) * float(cfg.options.get("dt_factor", 1.0))
        steps = (2 * t0 + tail) / dt
        runs = 3 if kind == "pulse-switch" else 22
        return float(_two_exc_dim(n)) * n * 4 * steps * runs
    if kind == "decay":
        rates = cfg.sweep.get("gamma_1d") or [cfg.params.gamma_1d]
        t_end = float(cfg.options.get("t_end", 60.0))
        dt = suggested_dt(cfg.params, cfg.drive) * float(cfg.options.get("dt_factor", 1.0))
        return (1.0 + 2 * n) * n * 4 * (t_end / dt) * len(rates)
    if kind == "dephasing-sweep":
        spec = cfg.sweep.get("delta")
        pts = len(parse_grid(spec, "delta")) if spec is not None else int(cfg.options.get("points", 401))
        gammas = list(cfg.sweep.get("gamma_deph") or [0.0])
        return 2e4 * pts * n * len(gammas)
    if kind == "scaling":
        ns = [int(v) for v in (cfg.sweep.get("n_atoms") or [n])]
        gammas = list(cfg.options.get("gamma_rel", [0.0]))
        cost = 0.0
        for g in gammas:
            for nn in ns:
                cost += (nn**6) * 30.0 / max(nn, 1) if g else nn**3
        return cost
    raise ConfigError(f"unknown scenario kind {kind!r}")


def check_budget(cfg: ScenarioConfig) -> float:
    cost = estimate_cost(cfg)
    if cost > cfg.budget:
        raise BudgetExceededError(
            f"projected cost {cost:.3e} ops exceeds budget {cfg.budget:.3e}; "
            "raise --budget to run this configuration"
        )
    return cost


# -- shared physics helpers -----------------------------------------------------


def golden_minimize(f, a: float, b: float, rel_tol: float = 1e-2, max_iter: int = 60):
    """Deterministic golden-section minimization on [a, b].

    Returns (x_min, f_min, trace) with the evaluation trace in call order.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    trace = []

    def eval_at(x):
        y = f(x)
        trace.append((x, y))
        return y

    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = eval_at(c), eval_at(d)
    for _ in range(max_iter):
        if (b - a) <= rel_tol * max(abs(a), abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = eval_at(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = eval_at(d)
    x = c if fc < fd else d
    y = min(fc, fd)
    return x, y, trace


def linear_transmittance(params: PhysicalParams, delta: float, e0: float) -> float:
    """Linear (one-photon) transmittance of the bare chain at one detuning."""
    basis = build_basis(params.n_atoms, max_exc=1)
    ham = assemble_hamiltonian(params, DriveSpec("cw", e0, float(delta)), basis)
    ss = steady_state_weak_drive(ham, order=1)
    return intensity(ss.psi, transmission_spec(ham, e0), ham) / e0**2


def find_linear_resonance(
    params: PhysicalParams,
    lo: float,
    hi: float,
    *,
    e0: float = DEFAULT_AMPLITUDE,
    coarse_points: int = 41,
    rel_tol: float = 1e-4,
):
    """Probe detuning of maximal linear attenuation, grid plus golden refine."""
    grid = np.linspace(lo, hi, coarse_points)
    ts = np.array([linear_transmittance(params, d, e0) for d in grid])
    k = int(np.argmin(ts))
    a = grid[max(0, k - 1)]
    b = grid[min(len(grid) - 1, k + 1)]
    x, tmin, trace = golden_minimize(lambda d: linear_transmittance(params, d, e0), a, b, rel_tol)
    return float(x), float(tmin), trace


def conditional_spectrum_spin(params, branch, deltas, e0, threads=1):
    """Spin-model conditional spectrum with the gate held by a dark ancilla."""

    def point(delta):
        drive = DriveSpec("cw", e0, float(delta))
        ham, _basis, anc = assemble_with_gate_ancilla(params, drive)
        gate = ancilla_gate_eigenstate(ham, anc, branch)
        ss = steady_state_weak_drive(ham, order=1, gate=gate)
        r = intensity(ss.psi, reflection_spec(ham), ham) / e0**2
        t = intensity(ss.psi, transmission_spec(ham, e0), ham) / e0**2
        return r, t

    vals = _pool_map(point, deltas, threads)
    return np.array([v[0] for v in vals]), np.array([v[1] for v in vals])


def linear_spectrum_spin(params, deltas, e0, threads=1):
    """Spin-model linear spectrum of the bare chain (no gate)."""

    def point(delta):
        basis = build_basis(params.n_atoms, max_exc=1)
        ham = assemble_hamiltonian(params, DriveSpec("cw", e0, float(delta)), basis)
        ss = steady_state_weak_drive(ham, order=1)
        r = intensity(ss.psi, reflection_spec(ham), ham) / e0**2
        t = intensity(ss.psi, transmission_spec(ham, e0), ham) / e0**2
        return r, t

    vals = _pool_map(point, deltas, threads)
    return np.array([v[0] for v in vals]), np.array([v[1] for v in vals])


def refine_tm_peak(params, branch, anchor, half_window=None, gamma=0.0):
    """Position and height of a conditional transfer-matrix resonance.

    The perturbative anchor can miss the true peak by a sizable fraction of
    the sublattice splitting when the exchange is not small against the
    control detuning, so the default search window scales with the
    splitting.
    """
    if params.n_atoms % 2:
        raise ConfigError("conditional spectra need an even chain length")
    if half_window is None:
        half_window = max(6.0, 0.45 * abs(splitting_formula(params)))
    cell = conditional_cell(params, branch, gamma=gamma)

    def neg_r(delta):
        spec = cascade_spectrum(cell, params.n_atoms // 2, [delta])
        return -float(spec.reflectance[0])

    grid = np.linspace(anchor - half_window, anchor + half_window, 201)
    vals = [neg_r(d) for d in grid]
    k = int(np.argmin(vals))
    a, b = grid[max(0, k - 1)], grid[min(len(grid) - 1, k + 1)]
    x, y, _ = golden_minimize(neg_r, a, b, rel_tol=1e-6)
    return float(x), float(-y)


def conditional_peak_pair(params, branch="s", points=1501, smooth=2):
    """Positions of the two conditional s-resonances in the transfer matrix.

    Scans a window covering both sublattice resonances, lightly smooths the
    reflectance to merge interference-dip twins, and returns the two
    dominant local maxima ordered in detuning (minus, plus).
    """
    if params.n_atoms % 2:
        raise ConfigError("conditional spectra need an even chain length")
    res = resonances(params, branch)
    split = abs(splitting_formula(params)) or 1.0
    center = 0.5 * (res.plus.delta + res.minus.delta)
    lo = center - 1.2 * split
    hi = center + 1.2 * split
    deltas = np.linspace(lo, hi, points)
    spec = cascade_spectrum(conditional_cell(params, branch), params.n_atoms // 2, deltas)
    r = spec.reflectance
    if smooth:
        kernel = np.ones(2 * smooth + 1) / (2 * smooth + 1)
        r = np.convolve(r, kernel, mode="same")
    maxima = [
        k
        for k in range(1, len(r) - 1)
        if r[k] >= r[k - 1] and r[k] >= r[k + 1] and r[k] > 0.05 * r.max()
    ]
    if not maxima:
        raise ConfigError("no reflectance peaks found in the conditional window")
    maxima.sort(key=lambda k: -r[k])
    first = maxima[0]
    min_sep = max(split / 4.0, 4.0 * (deltas[1] - deltas[0]))
    second = None
    for k in maxima[1:]:
        if abs(deltas[k] - deltas[first]) >= min_sep:
            second = k
            break
    if second is None:
        raise ConfigError("only one conditional resonance found; splitting unresolved")
    pair = sorted([deltas[first], deltas[second]])
    return float(pair[0]), float(pair[1])


def compensated_params(params: PhysicalParams, branch: str = "s", target: str = "plus"):
    """Apply the off-resonant-sublattice phase correction for a pulse target.

    Returns (new params, diagnostics).  The probed resonance is the ``plus``
    (broader) or ``minus`` (narrower) conditional s-resonance; the phase
    correction cancels the first-order kicks of the other sublattice's e-
    and s-transitions.
    """
    res_s = resonances(params, "s")
    res_e = resonances(params, "e")
    tgt = res_s.plus if target == "plus" else res_s.minus
    off_s = res_s.minus if target == "plus" else res_s.plus
    off_e = res_e.minus if target == "plus" else res_e.plus
    kappa, ka = phase_compensation(
        tgt.delta - off_e.delta,
        tgt.delta - off_s.delta,
        off_e.gamma_1d_eff,
        off_s.gamma_1d_eff,
    )
    new = replace(params, ka=None, kappa=kappa)
    diag = {
        "kappa": kappa,
        "ka": ka,
        "target_delta_estimate": tgt.delta,
        "off_s_delta": off_s.delta,
        "off_e_delta": off_e.delta,
    }
    return new, diag


# -- pulse machinery -------------------------------------------------------------


def pulse_trajectory(params, drive, psi0, t_end, dt, record_stride):
    """Evolve one pulse run recording raw output intensities and the envelope."""
    basis = build_basis(params.n_atoms, max_exc=2)
    ham = assemble_hamiltonian(params, drive, basis)
    r_spec = reflection_spec(ham)
    z_end = float(params.n_atoms)
    phase_end = np.exp(1j * ham.phase_per_site * z_end)

    def i_r(psi, t):
        return intensity_raw(psi, r_spec, ham)

    def i_t(psi, t):
        from wqed.observables import FieldOperatorSpec

        spec = FieldOperatorSpec(+1, z_end, drive.envelope(t) * phase_end)
        return intensity_raw(psi, spec, ham)

    def env_sq(psi, t):
        return drive.envelope(t) ** 2

    return evolve(
        ham,
        psi0,
        t_end,
        dt,
        record_stride=record_stride,
        recorders={"i_r": i_r, "i_t": i_t, "env_sq": env_sq},
    )


@dataclass
class PulseSwitchResult:
    times: np.ndarray
    with_gate: Trajectory
    background: Trajectory
    no_gate: Trajectory
    r_pulse: float
    t_pulse_gate: float
    r_pulse_no_gate: float
    t_pulse_no_gate: float
    input_energy: float
    meta: dict


def run_pulse_switch(params, branch, t0, *, e0=2e-4, carrier=None, tail=3.0,
                     dt_factor=1.0, record_stride=None, gate_kind="subradiant",
                     background: Trajectory | None = None, threads=1):
    """Signal pulse against stored gate: the three runs and their integrals.

    ``background`` may carry a previously computed drive-free gate run on a
    grid with the same step whose window is at least as long; it is sliced
    to this window.
    """
    if carrier is None:
        anchor = resonances(params, "s").plus.delta
        carrier, peak = refine_tm_peak(params, branch, anchor)
    drive = DriveSpec("sin2-pulse", e0, float(carrier), float(t0))
    dt = suggested_dt(params, drive) * dt_factor
    t_end = 2.0 * t0 + tail
    n_steps = int(round(t_end / dt))
    if record_stride is None:
        record_stride = max(1, n_steps // 4000)

    gate = build_gate_state(params, gate_kind)
    basis = build_basis(params.n_atoms, max_exc=2)
    psi_gate = embed_gate(gate, basis)

    def gate_run():
        return pulse_trajectory(params, drive, psi_gate, t_end, dt, record_stride)

    def bg_run():
        return pulse_trajectory(params, drive.off(), psi_gate, t_end, dt, record_stride)

    def nogate_run():
        return pulse_trajectory(params, drive, basis.ground_state(), t_end, dt, record_stride)

    if background is None:
        runs = _pool_map(lambda f: f(), [gate_run, bg_run, nogate_run], threads)
        with_gate, bg, no_gate = runs
    else:
        runs = _pool_map(lambda f: f(), [gate_run, nogate_run], threads)
        with_gate, no_gate = runs
        bg = background

    n_rec = len(with_gate.times)
    if len(bg.times) < n_rec or abs(bg.dt - with_gate.dt) > 1e-12:
        raise ConfigError("background run grid incompatible with the pulse window")
    times = with_gate.times
    bg_r = bg.data["i_r"][:n_rec]
    bg_t = bg.data["i_t"][:n_rec]

    input_energy = float(np.trapezoid(with_gate.data["env_sq"], times))
    r_pulse = pulse_reflectance(times, with_gate.data["i_r"], bg_r, input_energy)
    t_pulse_gate = pulse_reflectance(times, with_gate.data["i_t"], bg_t, input_energy, warn_negative=False)
    zeros = np.zeros_like(times)
    r_no = pulse_reflectance(times, no_gate.data["i_r"], zeros, input_energy, warn_negative=False)
    t_no = pulse_reflectance(times, no_gate.data["i_t"], zeros, input_energy, warn_negative=False)

    meta = {
        "carrier": float(carrier),
        "t0": float(t0),
        "dt": dt,
        "t_end": t_end,
        "record_stride": record_stride,
        "gate_kind": gate_kind,
        "gate_nominal_decay": gate.nominal_decay,
    }
    return PulseSwitchResult(
        times=times,
        with_gate=with_gate,
        background=bg,
        no_gate=no_gate,
        r_pulse=r_pulse,
        t_pulse_gate=t_pulse_gate,
        r_pulse_no_gate=r_no,
        t_pulse_no_gate=t_no,
        input_energy=input_energy,
        meta=meta,
    )


def optimize_t0(objective, t_min: float, t_max: float, *, coarse_points: int = 8,
                rel_tol: float = 1e-2, map_fn=map):
    """Coarse log-spaced scan plus golden refinement of a pulse-width objective.

    ``objective`` maps t0 to the quantity to MAXIMIZE.  Returns
    (t0_opt, best_value, trace, boundary_flag); a best coarse point on the
    scan boundary flags a (warned) non-unimodal or mis-bracketed trace.
    ``map_fn`` lets the caller parallelize the (independent) coarse scan;
    the golden refinement is inherently sequential.
    """
    if not (0 < t_min < t_max):
        raise ValueError("need 0 < t_min < t_max")
    grid = np.exp(np.linspace(math.log(t_min), math.log(t_max), coarse_points))
    coarse_vals = list(map_fn(objective, grid))
    trace = [(float(t), float(v)) for t, v in zip(grid, coarse_vals)]
    values = [v for _, v in trace]
    k = int(np.argmax(values))
    boundary = k in (0, coarse_points - 1)
    if boundary:
        warnings.warn(
            f"best coarse pulse width sits on the scan boundary (t0={grid[k]:.3g}); "
            "objective may be monotone over the given bounds",
            BoundaryOptimumWarning,
            stacklevel=2,
        )
        a = grid[max(0, k - 1)]
        b = grid[min(coarse_points - 1, k + 1)]
    else:
        a, b = grid[k - 1], grid[k + 1]
    x, y, g_trace = golden_minimize(lambda t: -objective(t), a, b, rel_tol=rel_tol)
    trace.extend((float(t), float(-v)) for t, v in g_trace)
    if -y >= values[k]:
        best_t, best_v = float(x), float(-y)
    else:
        best_t, best_v = float(grid[k]), float(values[k])
    return best_t, best_v, trace, boundary


# -- scenario runners -------------------------------------------------------------


def _gate_kind(cfg: ScenarioConfig) -> str:
    kind = cfg.gate.get("kind") or "none"
    return kind


def _scn_spectrum(cfg: ScenarioConfig, threads: int):
    deltas = parse_grid(cfg.sweep.get("delta"), "delta")
    gate = _gate_kind(cfg)
    branch = cfg.gate.get("branch", "s")
    e0 = cfg.drive.amplitude
    gamma = cfg.params.gamma_deph
    columns = {"delta": deltas}
    meta = {"gate": gate, "branch": branch}
    want_tm = cfg.model in ("transfer-matrix", "both")
    want_spin = cfg.model in ("spin-model", "both")

    if gate not in ("none", "ancilla"):
        raise ConfigError("spectrum scenario supports gate kinds 'none' and 'ancilla'")
    if want_spin and gamma > 0:
        raise ConfigError("spin-model spectra with dephasing are out of scope; use transfer-matrix")

    if want_tm:
        if gate == "ancilla":
            spec = cascade_spectrum(
                conditional_cell(cfg.params, branch, gamma=gamma), cfg.params.n_atoms // 2, deltas
            )
        else:
            spec = cascade_spectrum(uniform_cell(cfg.params, gamma=gamma), cfg.params.n_atoms, deltas)
        columns["r_tm"] = spec.reflectance
        columns["t_tm"] = spec.transmittance
    if want_spin:
        if gate == "ancilla":
            r, t = conditional_spectrum_spin(cfg.params, branch, deltas, e0, threads)
        else:
            r, t = linear_spectrum_spin(cfg.params, deltas, e0, threads)
        columns["r_spin"] = r
        columns["t_spin"] = t
    if want_tm and want_spin:
        meta["max_abs_diff_r"] = float(np.max(np.abs(columns["r_tm"] - columns["r_spin"])))
        meta["max_abs_diff_t"] = float(np.max(np.abs(columns["t_tm"] - columns["t_spin"])))
    files = {"spectrum": (columns, meta)}
    return files, meta


def _scn_g2map(cfg: ScenarioConfig, threads: int):
    offsets = parse_grid(cfg.sweep.get("delta_offset"), "delta_offset")
    couplings = parse_grid(cfg.sweep.get("coupling_j"), "coupling_j")
    e0 = cfg.drive.amplitude
    opts = cfg.options
    window = opts.get("resonance_window")
    res = resonances(cfg.params, "s")
    lo, hi = (res.delta_single - 2.0, res.delta_single + 2.0) if window is None else tuple(window)
    delta_res, t_min, _ = find_linear_resonance(cfg.params, lo, hi, e0=e0)
    meta = {"delta_res": delta_res, "t_min": t_min}

    tasks = [(float(j), float(off)) for j in couplings for off in offsets]

    def point(task):
        j, off = task
        pj = replace(cfg.params, coupling_j=j)
        delta = delta_res + off
        basis = build_basis(pj.n_atoms, max_exc=2)
        ham = assemble_hamiltonian(pj, DriveSpec("cw", e0, delta), basis)
        ss = steady_state_weak_drive(ham, order=2)
        g2 = g2_zero(ss.psi, ham, e0)
        t1 = intensity(ss.components[0] + ss.components[1], transmission_spec(ham, e0), ham) / e0**2
        if pj.n_atoms % 2 == 0 and j != 0.0:
            spec = cascade_spectrum(conditional_cell(pj, "s"), pj.n_atoms // 2, [delta])
            r_cond = float(spec.reflectance[0])
        else:
            r_cond = 0.0
        return g2, t1, r_cond

    vals = _pool_map(point, tasks, threads)
    columns = {
        "coupling_j": np.array([t[0] for t in tasks]),
        "delta_offset": np.array([t[1] for t in tasks]),
        "delta": np.array([delta_res + t[1] for t in tasks]),
        "g2": np.array([v[0] for v in vals]),
        "t_linear": np.array([v[1] for v in vals]),
        "r_conditional_tm": np.array([v[2] for v in vals]),
    }
    files = {"g2map": (columns, meta)}

    for idx, pt in enumerate(opts.get("popmap_points", [])):
        off, j = float(pt[0]), float(pt[1])
        pj = replace(cfg.params, coupling_j=j)
        basis = build_basis(pj.n_atoms, max_exc=2)
        ham = assemble_hamiltonian(pj, DriveSpec("cw", e0, delta_res + off), basis)
        ss = steady_state_weak_drive(ham, order=2)
        pm = population_map(ss.components[2], basis)
        same, cross = parity_class_weights(pm)
        pm_meta = {
            "delta_offset": off,
            "coupling_j": j,
            "delta_res": delta_res,
            "same_parity_weight": same,
            "cross_parity_weight": cross,
        }
        files[f"popmap_{idx}"] = (popmap_to_columns(pm), pm_meta)
    return files, meta


def _pulse_setup(cfg: ScenarioConfig):
    params = cfg.params
    diag = {}
    if cfg.options.get("auto_kappa", True) and params.ka is None and params.kappa == 0.0:
        params, diag = compensated_params(params, cfg.gate.get("branch", "s"),
                                          cfg.options.get("target", "plus"))
    anchor = resonances(params, "s").plus.delta if cfg.options.get("target", "plus") == "plus" \
        else resonances(params, "s").minus.delta
    carrier = cfg.options.get("carrier")
    if carrier is None:
        carrier, peak = refine_tm_peak(params, cfg.gate.get("branch", "s"), anchor)
        diag["tm_peak_reflectance"] = peak
    diag["carrier"] = float(carrier)
    return params, float(carrier), diag


def _scn_pulse_switch(cfg: ScenarioConfig, threads: int):
    if cfg.drive.kind != "sin2-pulse":
        raise ConfigError("pulse-switch needs a sin2-pulse drive")
    params, carrier, diag = _pulse_setup(cfg)
    result = run_pulse_switch(
        params,
        cfg.gate.get("branch", "s"),
        cfg.drive.pulse_width,
        e0=cfg.drive.amplitude,
        carrier=carrier,
        tail=float(cfg.options.get("tail", 3.0)),
        dt_factor=float(cfg.options.get("dt_factor", 1.0)),
        gate_kind=cfg.gate.get("kind") or "subradiant",
        threads=threads,
    )
    columns = {
        "t": result.times,
        "env_sq": result.with_gate.data["env_sq"],
        "i_r_gate": result.with_gate.data["i_r"],
        "i_t_gate": result.with_gate.data["i_t"],
        "i_r_bg": result.background.data["i_r"][: len(result.times)],
        "i_t_bg": result.background.data["i_t"][: len(result.times)],
        "i_r_nogate": result.no_gate.data["i_r"],
        "i_t_nogate": result.no_gate.data["i_t"],
    }
    meta = dict(diag)
    meta.update(result.meta)
    meta.update(
        r_pulse=result.r_pulse,
        t_pulse_gate=result.t_pulse_gate,
        r_pulse_no_gate=result.r_pulse_no_gate,
        t_pulse_no_gate=result.t_pulse_no_gate,
        input_energy=result.input_energy,
        amplitude=cfg.drive.amplitude,
    )
    return {"pulse": (columns, meta)}, meta


def _scn_optimize_t0(cfg: ScenarioConfig, threads: int):
    t0_spec = cfg.sweep.get("t0")
    if not isinstance(t0_spec, dict) or "min" not in t0_spec or "max" not in t0_spec:
        raise ConfigError("optimize-t0 needs sweep.t0 = {min, max}")
    t_min, t_max = float(t0_spec["min"]), float(t0_spec["max"])
    params, carrier, diag = _pulse_setup(cfg)

    res = resonances(params, "s")
    tgt = res.plus if cfg.options.get("target", "plus") == "plus" else res.minus
    gamma_dec = res.p_e_single * params.gamma_prime
    width = 0.5 * params.n_atoms * tgt.gamma_1d_eff
    if 1.0 / t_max <= gamma_dec or 1.0 / t_min >= width:
        raise ConfigError(
            f"t0 bounds [{t_min}, {t_max}] violate the ordering "
            f"decay ({gamma_dec:.3g}) < 1/t0 < resonance width ({width:.3g})"
        )

    e0 = cfg.drive.amplitude
    tail = float(cfg.options.get("tail", 3.0))
    dt_factor = float(cfg.options.get("dt_factor", 1.0))
    gate_kind = cfg.gate.get("kind") or "subradiant"

    # the drive-free gate run is t0-independent: compute it once on the
    # longest window and slice per evaluation
    probe = DriveSpec("sin2-pulse", e0, carrier, t_max)
    dt = suggested_dt(params, probe) * dt_factor
    t_end_max = 2.0 * t_max + tail
    n_steps = int(round(t_end_max / dt))
    stride = max(1, int(round((2.0 * t_min + tail) / dt)) // 4000)
    gate = build_gate_state(params, gate_kind)
    basis = build_basis(params.n_atoms, max_exc=2)
    psi_gate = embed_gate(gate, basis)
    background = pulse_trajectory(params, probe.off(), psi_gate, t_end_max, dt, stride)

    cache = {}

    def objective(t0: float) -> float:
        key = round(float(t0), 9)
        if key not in cache:
            result = run_pulse_switch(
                params,
                cfg.gate.get("branch", "s"),
                float(t0),
                e0=e0,
                carrier=carrier,
                tail=tail,
                dt_factor=dt_factor,
                record_stride=stride,
                gate_kind=gate_kind,
                background=background,
                threads=threads,
            )
            cache[key] = result
        return cache[key].r_pulse

    t0_opt, r_opt, trace, boundary = optimize_t0(
        objective,
        t_min,
        t_max,
        coarse_points=int(cfg.options.get("coarse_points", 8)),
        rel_tol=float(cfg.options.get("rel_tol", 1e-2)),
        map_fn=lambda f, xs: _pool_map(f, xs, threads),
    )
    best = cache[round(float(t0_opt), 9)]
    columns = {
        "t0": np.array([t for t, _ in trace]),
        "r_pulse": np.array([v for _, v in trace]),
    }
    meta = dict(diag)
    meta.update(
        t0_opt=t0_opt,
        r_pulse_opt=r_opt,
        boundary_warning=bool(boundary),
        t_pulse_no_gate=best.t_pulse_no_gate,
        t_pulse_gate=best.t_pulse_gate,
        r_pulse_no_gate=best.r_pulse_no_gate,
        gamma_dec=gamma_dec,
        resonance_width=width,
    )
    return {"t0_trace": (columns, meta)}, meta


def _scn_decay(cfg: ScenarioConfig, threads: int):
    rates = [float(g) for g in (cfg.sweep.get("gamma_1d") or [cfg.params.gamma_1d])]
    gate_kind = cfg.gate.get("kind") or "subradiant"
    t_end = float(cfg.options.get("t_end", 60.0))
    dt_factor = float(cfg.options.get("dt_factor", 1.0))

    def one(g1d):
        p = replace(cfg.params, gamma_1d=g1d)
        gate = build_gate_state(p, gate_kind, site=cfg.gate.get("site"))
        basis = build_basis(p.n_atoms, max_exc=1)
        drive = DriveSpec("cw", 0.0, 0.0)
        ham = assemble_hamiltonian(p, drive, basis)
        dt = suggested_dt(p, drive) * dt_factor
        n_steps = int(round(t_end / dt))
        stride = max(1, n_steps // 4000)
        traj = evolve(ham, embed_gate(gate, basis), t_end, dt, record_stride=stride)
        rate_long = decay_rate_from_trajectory(traj, long_time=True)
        rate_full = decay_rate_from_trajectory(traj)
        return traj, rate_long, rate_full, gate.nominal_decay

    results = _pool_map(one, rates, threads)
    files = {}
    meta = {"gate": gate_kind, "rates_long_time": {}, "rates_full": {}}
    cols = {"gamma_1d": [], "t": [], "p_e_tot": [], "p_s_tot": [], "p_total": []}
    for g1d, (traj, rate_l, rate_f, nominal) in zip(rates, results):
        n = len(traj.times)
        cols["gamma_1d"].append(np.full(n, g1d))
        cols["t"].append(traj.times)
        cols["p_e_tot"].append(traj.data["p_e_tot"])
        cols["p_s_tot"].append(traj.data["p_s_tot"])
        cols["p_total"].append(traj.p_total)
        meta["rates_long_time"][f"{g1d:g}"] = rate_l
        meta["rates_full"][f"{g1d:g}"] = rate_f
    columns = {k: np.concatenate(v) for k, v in cols.items()}
    file_meta = {
        "gate": gate_kind,
        **{f"rate_long_time_{k}": v for k, v in meta["rates_long_time"].items()},
    }
    files["decay"] = (columns, file_meta)
    return files, meta


def _scn_dephasing_sweep(cfg: ScenarioConfig, threads: int):
    deltas_spec = cfg.sweep.get("delta")
    gammas = [float(g) for g in (cfg.sweep.get("gamma_deph") or [0.0])]
    p = cfg.params
    gate = _gate_kind(cfg)
    branch = cfg.gate.get("branch", "s")

    if gate == "none":
        lam_anchor = resonances(p, "s").delta_single
        n_half = p.n_atoms

        def spectrum(gamma, deltas):
            return cascade_spectrum(uniform_cell(p, gamma=gamma), p.n_atoms, deltas)

    else:
        lam_anchor = resonances(p, "s").plus.delta
        n_half = p.n_atoms // 2

        def spectrum(gamma, deltas):
            return cascade_spectrum(conditional_cell(p, branch, gamma=gamma), p.n_atoms // 2, deltas)

    # locate the gamma = 0 resonance, then sweep a window around it
    half_probe = 5.0 if gate == "none" else max(5.0, 0.45 * abs(splitting_formula(p)))
    probe = np.linspace(lam_anchor - half_probe, lam_anchor + half_probe, 201)
    spec0 = spectrum(0.0, probe)
    k = int(np.argmax(spec0.reflectance))
    lam, r0 = golden_minimize(
        lambda d: -float(spectrum(0.0, [d]).reflectance[0]),
        probe[max(0, k - 1)],
        probe[min(len(probe) - 1, k + 1)],
        rel_tol=1e-7,
    )[:2]
    r0 = -r0
    if deltas_spec is None:
        half = max(2.0, 3.0 / max(n_half, 1))
        deltas = np.linspace(lam - half, lam + half, int(cfg.options.get("points", 401)))
    else:
        deltas = parse_grid(deltas_spec, "delta")

    use_eq8 = gate == "none" and p.coupling_j == 0.0
    if use_eq8:
        u = lam - p.delta_c
        p_lambda = 1.0 / (1.0 + (p.rabi / u) ** 2) if p.rabi else 1.0
    meta = {"lambda": float(lam), "r_max_gamma0": float(r0), "gate": gate}
    if use_eq8:
        meta["p_lambda"] = p_lambda

    cols = {"gamma_deph": [], "delta": [], "r_tm": [], "t_tm": []}
    if use_eq8:
        cols["r_eq8"] = []
    rmax = {}
    peak_err = {}
    for gamma in gammas:
        spec = spectrum(gamma, deltas)
        n = len(deltas)
        cols["gamma_deph"].append(np.full(n, gamma))
        cols["delta"].append(deltas)
        cols["r_tm"].append(spec.reflectance)
        cols["t_tm"].append(spec.transmittance)
        rmax[f"{gamma:g}"] = float(spec.reflectance.max())
        if use_eq8:
            kl = kappa_lambda_dispersive(p.rabi, lam, p.delta_c, gamma) if p.rabi else 1.0
            pred = np.array(
                [
                    dephased_lorentzian(n_half, p.gamma_1d, p.gamma_prime, gamma, p_lambda, kl, d - lam)
                    for d in deltas
                ]
            )
            cols["r_eq8"].append(pred)
            peak_err[f"{gamma:g}"] = float(abs(spec.reflectance.max() - pred.max()))
    columns = {k: np.concatenate(v) for k, v in cols.items()}
    meta["r_max"] = rmax
    if use_eq8:
        meta["peak_match_error"] = peak_err
    file_meta = {"lambda": float(lam), "gate": gate, **{f"r_max_{k}": v for k, v in rmax.items()}}
    return {"dephasing": (columns, file_meta)}, meta


def _scn_scaling(cfg: ScenarioConfig, threads: int):
    ns = [int(v) for v in (cfg.sweep.get("n_atoms") or [])]
    if len(ns) < 3:
        raise ConfigError("scaling needs sweep.n_atoms with at least 3 sizes")
    gamma_rel = [float(g) for g in cfg.options.get("gamma_rel", [0.0])]
    p = cfg.params
    eps = p.rabi / p.delta_c if p.delta_c else 0.0
    g_eff = (eps * eps) * p.gamma_1d if eps else p.gamma_1d
    ka = p.phase_per_site
    grid_points = int(cfg.options.get("grid_points", 3001))

    def rate_for(task):
        from scipy.linalg import eig as dense_eig

        from wqed.errors import WindowTooShortError

        nn, grel = task
        h = waveguide_block(nn, g_eff, ka)
        vals, vecs = dense_eig(h)
        k = int(np.argmin(-2.0 * vals.imag))  # most subradiant mode
        psi0 = vecs[:, k] / np.linalg.norm(vecs[:, k])
        rate_eig = float(-2.0 * vals[k].imag)
        gamma_abs = grel * g_eff
        t_end = 5.0 / max(rate_eig, 1e-300)
        last_exc = None
        for _ in range(4):
            traj = evolve_density_single_exc(
                h,
                DensityBlock.from_pure(psi0),
                gamma_abs,
                t_end,
                t_end / (grid_points - 1),
                method="spectral",
            )
            try:
                return decay_rate_from_trajectory(traj), rate_eig
            except WindowTooShortError as exc:
                last_exc = exc
                t_end *= 4.0
        raise last_exc

    tasks = [(nn, grel) for grel in gamma_rel for nn in ns]
    vals = _pool_map(rate_for, tasks, threads)
    columns = {
        "gamma_rel": np.array([t[1] for t in tasks]),
        "n_atoms": np.array([t[0] for t in tasks], dtype=int),
        "gamma_wg": np.array([v[0] for v in vals]),
        "gamma_wg_eigen": np.array([v[1] for v in vals]),
    }
    meta = {"gamma_1d_eff": g_eff, "fits": {}}
    for grel in gamma_rel:
        pts = [(nn, v[0]) for (nn, gr), v in zip(tasks, vals) if gr == grel]
        fit = fit_scaling(pts)
        meta["fits"][f"{grel:g}"] = {
            "alpha": fit.alpha,
            "prefactor": fit.prefactor,
            "residual": fit.residual,
            "polynomial": fit.polynomial,
        }
    file_meta = {"gamma_1d_eff": g_eff}
    for grel, fit in meta["fits"].items():
        file_meta[f"alpha_{grel}"] = fit["alpha"]
        file_meta[f"polynomial_{grel}"] = fit["polynomial"]
    return {"scaling": (columns, file_meta)}, meta


_RUNNERS = {
    "spectrum": _scn_spectrum,
    "g2map": _scn_g2map,
    "pulse-switch": _scn_pulse_switch,
    "optimize-t0": _scn_optimize_t0,
    "decay": _scn_decay,
    "dephasing-sweep": _scn_dephasing_sweep,
    "scaling": _scn_scaling,
}


def run_scenario(cfg: ScenarioConfig) -> OutputManifest:
    """Execute one scenario: budget check, compute, write tables and manifest."""
    check_budget(cfg)
    threads = resolve_threads(cfg)
    t_start = time.perf_counter()
    files, summary = _RUNNERS[cfg.kind](cfg, threads)
    wall = time.perf_counter() - t_start

    run_id = _run_id(cfg)
    written = []
    for name, (columns, meta) in files.items():
        full_meta = {"run_id": run_id, "scenario": cfg.kind, **meta}
        path = f"{cfg.out}_{name}.txt"
        write_table(path, full_meta, columns)
        written.append({"path": path, "columns": list(columns.keys())})

    manifest = OutputManifest(
        run_id=run_id,
        scenario=cfg.kind,
        code_version=wqed.__version__,
        wall_clock_s=wall,
        config=_jsonable(cfg.raw),
        files=written,
        summary=_jsonable(summary),
    )
    manifest.write(f"{cfg.out}.manifest.yaml")
    return manifest
