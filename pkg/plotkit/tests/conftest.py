"""Shared fixtures: miniature tables in the producer's file format."""

import numpy as np
import pytest


def write_table(path, meta, columns):
    names = list(columns)
    arrays = [np.atleast_1d(np.asarray(columns[k], float)) for k in names]
    lines = [f"# {k} = {v}" for k, v in meta.items()]
    lines.append(" ".join(names))
    for row in range(len(arrays[0])):
        lines.append(" ".join(format(float(a[row]), ".17g") for a in arrays))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def spectrum_table(tmp_path):
    delta = np.linspace(-5, 5, 21)
    r = 1.0 / (1.0 + delta**2)
    return write_table(
        tmp_path / "spec_spectrum.txt",
        {"scenario": "spectrum", "run_id": "fix-1"},
        {"delta": delta, "r_tm": r, "t_tm": 1 - r, "r_spin": r * 0.99, "t_spin": 1 - r * 0.99},
    )


@pytest.fixture
def g2map_table(tmp_path):
    offs = np.linspace(-2, 2, 5)
    js = np.array([10.0, 25.0])
    rows = {"coupling_j": [], "delta_offset": [], "delta": [], "g2": [], "t_linear": [], "r_conditional_tm": []}
    for j in js:
        for off in offs:
            rows["coupling_j"].append(j)
            rows["delta_offset"].append(off)
            rows["delta"].append(97.6 + off)
            rows["g2"].append(1.0 - 0.5 * np.exp(-((off - j / 25) ** 2)))
            rows["t_linear"].append(0.5 + 0.1 * off)
            rows["r_conditional_tm"].append(0.9 * np.exp(-((off - j / 25) ** 2)))
    return write_table(tmp_path / "g2_g2map.txt", {"scenario": "g2map", "delta_res": 97.6}, rows)


@pytest.fixture
def pulse_table(tmp_path):
    t = np.linspace(0, 8, 81)
    env = np.sin(np.clip(np.pi * t / 6.0, 0, np.pi)) ** 2 * 4e-8
    return write_table(
        tmp_path / "pulse_pulse.txt",
        {"scenario": "pulse-switch", "amplitude": 2e-4, "r_pulse": 0.75},
        {
            "t": t,
            "env_sq": env,
            "i_r_gate": 0.7 * env + 1e-9,
            "i_t_gate": 0.05 * env + 1e-9,
            "i_r_bg": np.full_like(t, 1e-9),
            "i_t_bg": np.full_like(t, 1e-9),
            "i_r_nogate": 0.001 * env,
            "i_t_nogate": 0.99 * env,
        },
    )


@pytest.fixture
def scaling_table(tmp_path):
    ns = np.array([20, 30, 40, 50, 60], float)
    return write_table(
        tmp_path / "scal_scaling.txt",
        {"scenario": "scaling", "alpha_0": 3.01, "polynomial_0": True},
        {
            "gamma_rel": np.zeros_like(ns),
            "n_atoms": ns,
            "gamma_wg": 5.0 * ns**-3.0,
            "gamma_wg_eigen": 5.0 * ns**-3.0,
        },
    )


@pytest.fixture
def popmap_table(tmp_path):
    size = 8
    rows = {"m": [], "n": [], "weight": []}
    for m in range(1, size + 1):
        for n in range(1, size + 1):
            rows["m"].append(m)
            rows["n"].append(n)
            w = 0.0
            if m != n and (m + n) % 2 == 0:
                w = 1.0 / (abs(m - n) + 1)
            rows["weight"].append(w)
    return write_table(tmp_path / "g2_popmap_0.txt", {"scenario": "g2map"}, rows)
