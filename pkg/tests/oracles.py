"""Independent brute-force reference implementations used only by tests.

Everything here is written against the physics rules directly (explicit
loops over configurations and operator actions), deliberately sharing no
code with the vectorized kernels in the package.
"""

from __future__ import annotations

import numpy as np


def _config_as_dict(config):
    """Configuration tuple -> {atom: level} mapping."""
    kind = config[0]
    if kind == "g":
        return {}
    if kind in ("e", "s"):
        return {config[1]: kind}
    if kind == "ee":
        return {config[1]: "e", config[2]: "e"}
    if kind == "ss":
        return {config[1]: "s", config[2]: "s"}
    if kind == "es":
        return {config[1]: "e", config[2]: "s"}
    raise ValueError(config)


def _dict_as_key(d):
    return tuple(sorted(d.items()))


def dense_hamiltonian(ham, t=0.0):
    """Dense matrix of the spin Hamiltonian, built one column at a time.

    Applies every elementary process (waveguide hop, control conversion,
    band-gap swap, drive raising/lowering, diagonal energies) to each basis
    configuration explicitly.
    """
    basis = ham.basis
    p = ham.params
    n = basis.n_atoms
    delta = ham.delta
    phase = ham.phase_per_site
    env = ham.drive.envelope(t)
    g1d = ham.gamma_1d_atoms
    gp = ham.gamma_prime_atoms
    mask = ham.drive_mask
    parity = ham.bg_parity
    pos = np.arange(1, n + 1, dtype=float)

    key_to_index = {}
    configs = []
    for i in range(basis.dimension):
        d = _config_as_dict(basis.config_of(i))
        key_to_index[_dict_as_key(d)] = i
        configs.append(d)

    H = np.zeros((basis.dimension, basis.dimension), dtype=np.complex128)

    for j, cfg in enumerate(configs):
        col = {}

        def add(target, coeff):
            if len(target) > basis.max_exc:
                return
            idx = key_to_index[_dict_as_key(target)]
            col[idx] = col.get(idx, 0.0) + coeff

        # diagonal energies (free-space width only; waveguide width comes
        # from the m = n term of the hop below)
        diag = 0.0
        for atom, level in cfg.items():
            if level == "e":
                diag += -(delta + 0.5j * gp[atom - 1])
            else:
                diag += -(delta - p.delta_c)
        if diag != 0.0:
            add(cfg, diag)

        # waveguide hop sigma_eg^m sigma_ge^n over all ordered (m, n)
        for nn in range(1, n + 1):
            if cfg.get(nn) != "e":
                continue
            lowered = dict(cfg)
            del lowered[nn]
            for mm in range(1, n + 1):
                if mm in lowered:
                    continue
                target = dict(lowered)
                target[mm] = "e"
                coeff = -0.5j * np.sqrt(g1d[mm - 1] * g1d[nn - 1]) * np.exp(
                    1j * phase * abs(pos[mm - 1] - pos[nn - 1])
                )
                add(target, coeff)

        # control-field conversion on each atom
        for atom, level in cfg.items():
            target = dict(cfg)
            target[atom] = "s" if level == "e" else "e"
            add(target, -p.rabi)

        # band-gap swap: e on one atom, s on another
        for nn, ln in cfg.items():
            if ln != "e":
                continue
            for mm, lm in cfg.items():
                if mm == nn or lm != "s":
                    continue
                target = dict(cfg)
                target[nn] = "s"
                target[mm] = "e"
                sign = -1.0 if (parity[mm - 1] + parity[nn - 1]) % 2 else 1.0
                dist = abs(pos[mm - 1] - pos[nn - 1])
                damp = np.exp(-dist / p.range_l) if np.isfinite(p.range_l) else 1.0
                add(target, p.coupling_j * sign * damp)

        # drive: raise g -> e anywhere free, lower e -> g
        if env != 0.0:
            for mm in range(1, n + 1):
                if mm not in cfg:
                    target = dict(cfg)
                    target[mm] = "e"
                    add(target, -env * mask[mm - 1] * np.exp(1j * phase * pos[mm - 1]))
            for mm, lm in cfg.items():
                if lm == "e":
                    target = dict(cfg)
                    del target[mm]
                    add(target, -env * mask[mm - 1] * np.exp(-1j * phase * pos[mm - 1]))

        for i, coeff in col.items():
            H[i, j] = coeff
    return H


def dense_output_field(ham, direction, z, e_in):
    """Dense matrix of the input-output field operator at position z."""
    basis = ham.basis
    n = basis.n_atoms
    pos = np.arange(1, n + 1, dtype=float)
    phase = ham.phase_per_site
    g1d = ham.gamma_1d_atoms

    key_to_index = {}
    configs = []
    for i in range(basis.dimension):
        d = _config_as_dict(basis.config_of(i))
        key_to_index[_dict_as_key(d)] = i
        configs.append(d)

    F = np.eye(basis.dimension, dtype=np.complex128) * e_in
    for j, cfg in enumerate(configs):
        for mm, lm in cfg.items():
            if lm != "e":
                continue
            target = dict(cfg)
            del target[mm]
            i = key_to_index[_dict_as_key(target)]
            F[i, j] += 0.5j * g1d[mm - 1] * np.exp(1j * direction * phase * (z - pos[mm - 1]))
    return F


def dense_liouvillian_single_exc(h_nh: np.ndarray, gamma: float) -> np.ndarray:
    """Dense superoperator of drho/dt = -i(H rho - rho H+) - gamma (rho - diag rho).

    Acts on vec(rho) with row-major vectorization.
    """
    n = h_nh.shape[0]
    eye = np.eye(n)
    L = -1j * (np.kron(h_nh, eye) - np.kron(eye, h_nh.conj()))
    # dephasing: -gamma * rho + gamma * diag(rho)
    L -= gamma * np.eye(n * n)
    keep = np.zeros((n * n, n * n))
    for k in range(n):
        keep[k * n + k, k * n + k] = 1.0
    L += gamma * keep
    return L
