import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from solwave import soliton as sol
from solwave.cli import main

SMALL = """
[experiment]
epsilon = 0.01

[grid]
n_points = 2048
length = 240

[evolution]
dt = 0.01
t_end = 1.0
record_stride = 20
"""


@pytest.fixture
def small_config(tmp_path):
    p = tmp_path / "small.ini"
    p.write_text(SMALL)
    return p


def test_soliton_csv(tmp_path, capsys):
    out = tmp_path / "phi.csv"
    assert main(["soliton", "--omega", "0.0625", "--grid", "1024,240", "--out", str(out)]) == 0
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["x", "phi", "dphi", "Lambda"] and len(rows) == 1025
    x, p = float(rows[600][0]), float(rows[600][1])
    assert p == sol.phi(np.array([x]), 0.0625)[0]
    assert "profile residual" in capsys.readouterr().out


def test_identities_exit_zero(capsys):
    assert main(["identities"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_spectrum_json(tmp_path):
    out = tmp_path / "s.json"
    assert main(["spectrum", "--operator", "Lplus", "--count", "3", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["negative_count"] == 1 and len(rep["eigenvalues"]) == 3


def test_modes_exit_zero(tmp_path):
    assert main(["modes", "--n-points", "384", "--out", str(tmp_path / "m.json")]) == 0
    assert json.loads((tmp_path / "m.json").read_text())["persistent_count"] == 0


def test_bounds_reports_failing_ratio(tmp_path):
    out = tmp_path / "b.json"
    code = main(["bounds", "--out", str(out)])
    rep = json.loads(out.read_text())
    failing = sorted(k for k, v in rep["explicit"].items() if not v)
    assert failing == ["quartic_ratio_4_omega0", "quartic_ratio_half"]
    assert code == 1


def test_run_small_config(tmp_path, small_config, capsys):
    out = tmp_path / "run"
    main(["run", "--config", str(small_config), "--out", str(out), "--seed", "4"])
    summary = json.loads(capsys.readouterr().out)
    assert summary["n_frames"] == 6
    for name in ("records.csv", "summary.json", "manifest.json"):
        assert (out / name).exists()
    assert json.loads((out / "manifest.json").read_text())["config"]["perturbation"]["seed"] == 4


def test_evolve_then_modulate(tmp_path, small_config):
    traj = tmp_path / "traj"
    assert main(["evolve", "--config", str(small_config), "--out", str(traj)]) == 0
    header = json.loads((traj / "trajectory.json").read_text())
    assert {"n_points", "length", "dt", "frame_count"} <= set(header)
    assert (traj / "trajectory.bin").stat().st_size == header["frame_count"] * 2048 * 16
    assert main(["modulate", "--trajectory", str(traj)]) == 0
    rows = list(csv.reader(open(traj / "modulation.csv")))
    assert len(rows) == header["frame_count"] + 1
    assert max(float(v) for r in rows[1:] for v in r[5:9]) < 1e-9


def test_verify_all_catches_corrupted_profile(capsys):
    code = main(["verify-all", "--no-modes", "--phi-scale", "1.01"])
    table = capsys.readouterr().out
    ode_rows = [line for line in table.splitlines() if line.startswith("soliton ODE residual")]
    assert len(ode_rows) == 3 and all(line.rstrip().endswith("FAIL") for line in ode_rows)
    assert code == 1


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "solwave.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for name in ("soliton", "identities", "spectrum", "modes", "evolve", "modulate", "bounds", "run", "verify-all"):
        assert name in res.stdout
