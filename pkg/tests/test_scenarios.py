"""Scenario runner: configs, budget guard, determinism, CLI and optimizer."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest
import yaml

from wqed.errors import BoundaryOptimumWarning, BudgetExceededError, ConfigError
from wqed.io import read_table
from wqed.scenarios import (
    check_budget,
    compensated_params,
    conditional_peak_pair,
    config_from_dict,
    find_linear_resonance,
    golden_minimize,
    load_config,
    optimize_t0,
    parse_grid,
    run_scenario,
)
from wqed.params import PhysicalParams


def small_spectrum_doc(tmp_path, **over):
    doc = {
        "kind": "spectrum",
        "out": str(tmp_path / "run"),
        "model": "both",
        "params": {"n_atoms": 6, "gamma_1d": 1.0, "gamma_prime": 0.0, "rabi": 2.0, "delta_c": 10.0},
        "drive": {"kind": "cw", "amplitude": 1e-4},
        "sweep": {"delta": {"start": -4.0, "stop": 14.0, "points": 31}},
        "threads": 1,
    }
    doc.update(over)
    return doc


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        config_from_dict({"kind": "bogus", "out": "x"})
    with pytest.raises(ConfigError):
        config_from_dict({"kind": "spectrum"})
    with pytest.raises(ConfigError):
        config_from_dict({"kind": "spectrum", "out": "x", "params": {"n_atoms": 0}})
    with pytest.raises(ConfigError):
        config_from_dict(
            {"kind": "spectrum", "out": "x", "params": {"n_atoms": 2, "bogus_key": 1}}
        )


def test_grid_parsing():
    assert np.allclose(parse_grid({"start": 0, "stop": 1, "points": 3}, "x"), [0, 0.5, 1])
    assert np.allclose(parse_grid([1.0, 2.0, 4.0], "x"), [1, 2, 4])
    with pytest.raises(ConfigError):
        parse_grid([2.0, 1.0], "x")
    with pytest.raises(ConfigError):
        parse_grid(None, "x")


def test_budget_guard():
    doc = small_spectrum_doc.__wrapped__ if hasattr(small_spectrum_doc, "__wrapped__") else None
    cfg = config_from_dict(
        {
            "kind": "g2map",
            "out": "x",
            "params": {"n_atoms": 100, "gamma_1d": 0.5, "rabi": 18.8, "delta_c": 94.0},
            "sweep": {"delta_offset": {"start": -3, "stop": 3, "points": 200},
                      "coupling_j": {"start": 1, "stop": 50, "points": 200}},
            "budget": 1e9,
        }
    )
    with pytest.raises(BudgetExceededError):
        check_budget(cfg)


def test_spectrum_scenario_writes_tables_and_manifest(tmp_path):
    cfg = config_from_dict(small_spectrum_doc(tmp_path))
    manifest = run_scenario(cfg)
    assert manifest.files
    for entry in manifest.files:
        meta, cols = read_table(entry["path"])
        assert list(cols.keys()) == entry["columns"]
        assert meta["run_id"] == manifest.run_id
    meta, cols = read_table(manifest.files[0]["path"])
    # lossless chain: R + T = 1 on both models
    assert np.max(np.abs(cols["r_tm"] + cols["t_tm"] - 1.0)) < 1e-10
    assert np.max(np.abs(cols["r_spin"] + cols["t_spin"] - 1.0)) < 1e-6
    assert float(meta["max_abs_diff_r"]) < 0.05
    with open(manifest.path) as fh:
        doc = yaml.safe_load(fh)
    assert doc["run_id"] == manifest.run_id
    assert doc["files"][0]["path"] == manifest.files[0]["path"]


def test_rerun_bit_reproduces_outputs(tmp_path):
    cfg1 = config_from_dict(small_spectrum_doc(tmp_path, out=str(tmp_path / "r1")))
    cfg2 = config_from_dict(small_spectrum_doc(tmp_path, out=str(tmp_path / "r2")))
    m1 = run_scenario(cfg1)
    m2 = run_scenario(cfg2)
    b1 = open(m1.files[0]["path"], "rb").read()
    b2 = open(m2.files[0]["path"], "rb").read()
    assert b1 == b2


def test_model_mismatch_summary_in_both_mode(tmp_path):
    cfg = config_from_dict(small_spectrum_doc(tmp_path))
    manifest = run_scenario(cfg)
    assert "max_abs_diff_r" in manifest.summary
    assert "max_abs_diff_t" in manifest.summary


def test_golden_minimize_quadratic():
    x, y, trace = golden_minimize(lambda x: (x - 2.3) ** 2 + 1.0, 0.5, 5.0, rel_tol=1e-4)
    assert x == pytest.approx(2.3, abs=2.3 * 2e-4)
    assert len(trace) >= 5


def test_optimize_t0_quadratic_objective():
    best_t, best_v, trace, boundary = optimize_t0(
        lambda t: -((t - 2.0) ** 2), 0.5, 8.0, rel_tol=1e-2
    )
    assert not boundary
    assert best_t == pytest.approx(2.0, rel=2e-2)
    assert best_v == pytest.approx(0.0, abs=1e-3)


def test_optimize_t0_monotone_warns_boundary():
    with pytest.warns(BoundaryOptimumWarning):
        best_t, _v, _trace, boundary = optimize_t0(lambda t: t, 1.0, 4.0)
    assert boundary
    assert best_t == pytest.approx(4.0, rel=5e-2)


def test_find_linear_resonance_small_chain():
    p = PhysicalParams(n_atoms=10, gamma_1d=0.5, rabi=18.8, delta_c=94.0)
    delta_res, t_min, _ = find_linear_resonance(p, 96.0, 99.5, coarse_points=21)
    assert 97.0 < delta_res < 98.4
    assert t_min < 0.05


def test_conditional_peak_pair_matches_splitting():
    import warnings

    p = PhysicalParams(n_atoms=40, gamma_1d=0.5, coupling_j=25.0, rabi=18.8, delta_c=94.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lo, hi = conditional_peak_pair(p)
    assert hi - lo == pytest.approx(4.30, rel=0.35)


def test_compensated_params_order_of_magnitude():
    import warnings

    p = PhysicalParams(n_atoms=100, gamma_1d=1.0, coupling_j=235.0, rabi=94.0, delta_c=470.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        newp, diag = compensated_params(p)
    assert 1e-4 < diag["kappa"] < 3e-3
    assert newp.phase_per_site == pytest.approx(math.pi / 2 * (1 + diag["kappa"]))


def test_cli_exit_codes(tmp_path):
    good = tmp_path / "good.yaml"
    with open(good, "w") as fh:
        yaml.safe_dump(small_spectrum_doc(tmp_path, out=str(tmp_path / "cli")), fh)
    env = dict(os.environ, PYTHONWARNINGS="ignore")
    r = subprocess.run(
        [sys.executable, "-m", "wqed.cli", "spectrum", "--config", str(good)],
        capture_output=True,
        text=True,
        env=env,
    )
    assert r.returncode == 0, r.stderr

    bad = tmp_path / "bad.yaml"
    with open(bad, "w") as fh:
        yaml.safe_dump({"kind": "spectrum", "out": str(tmp_path / "x")}, fh)
    r = subprocess.run(
        [sys.executable, "-m", "wqed.cli", "spectrum", "--config", str(bad)],
        capture_output=True,
        text=True,
        env=env,
    )
    assert r.returncode == 2

    # kind mismatch between config and subcommand
    r = subprocess.run(
        [sys.executable, "-m", "wqed.cli", "decay", "--config", str(good)],
        capture_output=True,
        text=True,
        env=env,
    )
    assert r.returncode == 2


def test_cli_budget_refusal(tmp_path):
    doc = small_spectrum_doc(tmp_path, out=str(tmp_path / "b"))
    doc["params"]["n_atoms"] = 120
    doc["gate"] = {"kind": "ancilla", "branch": "s"}
    doc["model"] = "spin-model"
    doc["budget"] = 1.0
    path = tmp_path / "cfg.yaml"
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh)
    r = subprocess.run(
        [sys.executable, "-m", "wqed.cli", "spectrum", "--config", str(path)],
        capture_output=True,
        text=True,
        env=dict(os.environ, PYTHONWARNINGS="ignore"),
    )
    assert r.returncode == 2
    assert "budget" in r.stderr.lower()


def test_load_config_round_trip(tmp_path):
    doc = small_spectrum_doc(tmp_path)
    path = tmp_path / "cfg.yaml"
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh)
    cfg = load_config(path)
    assert cfg.kind == "spectrum"
    assert cfg.params.n_atoms == 6
    assert cfg.drive.amplitude == 1e-4
