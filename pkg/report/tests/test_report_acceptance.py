"""Secondary acceptance: make-report over a real flagship run directory
produced by the simulator CLI (the only interface consumed), plus the
equilibrium placeholder path."""

import json
import os
import shutil
import subprocess

import pytest

from runreport.cli import main as report_main

pytestmark = pytest.mark.skipif(shutil.which("kfsim") is None,
                                reason="simulator CLI not installed")


def run_simulator(tmp_path, name, **overrides):
    out = os.path.join(tmp_path, name)
    cfg = {"dim": 1, "n": 64, "order": 32, "dt": 2e-3, "n_steps": 5000,
           "report_every": 10, "preset": "decay-torus", "epsilon": 1e-3,
           "seed": 7, "fit_window": [1.0, 10.0], "out_dir": out,
           "validate_weights_on_start": False}
    cfg.update(overrides)
    cfg_path = os.path.join(tmp_path, f"{name}.json")
    with open(cfg_path, "w") as fh:
        json.dump(cfg, fh)
    proc = subprocess.run(["kfsim", "run", "--config", cfg_path],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return out


def test_report_on_flagship_run(tmp_path):
    run_dir = run_simulator(tmp_path, "flagship")
    figs = os.path.join(tmp_path, "figs")
    assert report_main(["--run", run_dir, "--out", figs]) == 0
    for name in ("decay.svg", "conservation.svg", "entropy.svg"):
        assert os.path.getsize(os.path.join(figs, name)) > 0
    with open(os.path.join(run_dir, "summary.json")) as fh:
        summary = json.load(fh)
    lam = summary["fit"]["lambda_fit"]
    svg = open(os.path.join(figs, "decay.svg")).read()
    assert f"lambda = {lam!r}" in svg     # annotation equals the summary value
    print(f"\nACCEPTANCE report generation: PASS (lambda annotation {lam!r})")


def test_report_equilibrium_placeholder(tmp_path):
    run_dir = run_simulator(tmp_path, "equilibrium", preset="equilibrium",
                            n_steps=10, report_every=1, fit_window=[0.0, 0.02])
    figs = os.path.join(tmp_path, "figs_eq")
    assert report_main(["--run", run_dir, "--out", figs]) == 0
    svg = open(os.path.join(figs, "decay.svg")).read()
    assert "no decay to plot" in svg
    assert os.path.getsize(os.path.join(figs, "conservation.svg")) > 0
