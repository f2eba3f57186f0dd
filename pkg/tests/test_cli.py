"""End-to-end command-line runs: exit codes, outputs, reproducibility."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

GOOD_SYSTEM = {"n2": {"gamma": 0.3, "sigma": 0.05}}
A3_VIOLATING = {"n2": {"gamma": 0.8, "sigma": 0.05}}
SCALAR = {"D": [1.0], "M": [[0.0]], "C": [[1.0]]}


def run_cli(args, cwd, env_extra=None):
    env = dict(os.environ)
    env.pop("KPPFRONTS_OUT", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "kppfronts", *args],
                          capture_output=True, text=True, cwd=cwd, env=env)


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload, indent=1) + "\n")
    return str(path)


def manifest_without_wall_time(path):
    lines = path.read_text().splitlines()
    kept = [ln for ln in lines if not ln.startswith("wall_time_s")]
    assert len(kept) == len(lines) - 1  # exactly one wall-time line
    return "\n".join(kept)


def test_check_exit_codes_and_report(tmp_path):
    cfg = write_config(tmp_path, "good.json", {"system": GOOD_SYSTEM})
    out = run_cli(["check", "--config", cfg, "--out", str(tmp_path / "g")],
                  cwd=tmp_path)
    assert out.returncode == 0, out.stderr
    report = (tmp_path / "g" / "report.txt").read_text()
    assert "result = ok" in report
    assert "a3_right_half_plane = holds" in report

    cfg = write_config(tmp_path, "bad.json", {"system": A3_VIOLATING})
    out = run_cli(["check", "--config", cfg, "--out", str(tmp_path / "b")],
                  cwd=tmp_path)
    assert out.returncode == 3
    report = (tmp_path / "b" / "report.txt").read_text()
    assert "result = failed" in report
    assert "A3 = failed" in report
    manifest = (tmp_path / "b" / "manifest.txt").read_text()
    assert "command = check" in manifest
    assert "config_sha256 = " in manifest


def test_check_requested_subset_passes(tmp_path):
    # restricting the check to A1/A2 turns the A3 violation into a pass
    cfg = write_config(tmp_path, "sub.json",
                       {"system": A3_VIOLATING, "assumptions": ["A1", "A2"]})
    out = run_cli(["check", "--config", cfg, "--out", str(tmp_path / "s")],
                  cwd=tmp_path)
    assert out.returncode == 0, out.stderr


def test_equilibria_bistable_counts_and_values(tmp_path):
    cfg = write_config(tmp_path, "eq.json",
                       {"system": A3_VIOLATING, "seed": 7})
    out = run_cli(["equilibria", "--config", cfg, "--out", str(tmp_path / "e")],
                  cwd=tmp_path)
    assert out.returncode == 0, out.stderr
    rows = (tmp_path / "e" / "equilibria.csv").read_text().splitlines()
    assert rows[0] == "u_1,u_2,residual,stable"
    assert len(rows) == 4
    firsts = sorted(float(r.split(",")[0]) for r in rows[1:])
    expect = sorted([2.25 - 1.25 * np.sqrt(3.0), 1.0, 2.25 + 1.25 * np.sqrt(3.0)])
    assert np.allclose(firsts, expect, atol=1e-8)


def test_seeded_command_without_seed_is_usage_error(tmp_path):
    cfg = write_config(tmp_path, "eq.json", {"system": GOOD_SYSTEM})
    out = run_cli(["equilibria", "--config", cfg, "--out", str(tmp_path / "e")],
                  cwd=tmp_path)
    assert out.returncode == 2
    assert "seed" in out.stderr


def test_reruns_are_byte_identical_modulo_wall_time(tmp_path):
    cfg = write_config(tmp_path, "eq.json", {"system": A3_VIOLATING, "seed": 3})
    for d in ("r1", "r2"):
        out = run_cli(["equilibria", "--config", cfg,
                       "--out", str(tmp_path / d)], cwd=tmp_path)
        assert out.returncode == 0, out.stderr
    a, b = tmp_path / "r1", tmp_path / "r2"
    assert (a / "equilibria.csv").read_bytes() == (b / "equilibria.csv").read_bytes()
    assert (manifest_without_wall_time(a / "manifest.txt")
            == manifest_without_wall_time(b / "manifest.txt"))


def test_seed_flag_overrides_config(tmp_path):
    cfg = write_config(tmp_path, "eq.json", {"system": GOOD_SYSTEM, "seed": 1})
    out = run_cli(["equilibria", "--config", cfg, "--seed", "99",
                   "--out", str(tmp_path / "o")], cwd=tmp_path)
    assert out.returncode == 0, out.stderr
    assert "seed = 99" in (tmp_path / "o" / "manifest.txt").read_text()


def test_bifurcate_writes_threshold(tmp_path):
    cfg = write_config(tmp_path, "bif.json",
                       {"gamma": 0.75, "sigma_range": [0.05, 0.65],
                        "n_samples": 21, "seed": 2})
    out = run_cli(["bifurcate", "--config", cfg, "--out", str(tmp_path / "bf")],
                  cwd=tmp_path)
    assert out.returncode == 0, out.stderr
    text = (tmp_path / "bf" / "thresholds.txt").read_text()
    line = [ln for ln in text.splitlines() if ln.startswith("threshold_1")][0]
    assert abs(float(line.split("=")[1]) - 0.25) <= 1e-6
    header = (tmp_path / "bf" / "bifurcation.csv").read_text().splitlines()[0]
    assert header == "sigma,n_positive_equilibria,growth_eigenvalue,one_is_stable"


def test_simulate_writes_snapshots(tmp_path):
    cfg = write_config(tmp_path, "sim.json", {
        "system": SCALAR,
        "grid": {"x_min": 0.0, "x_max": 40.0, "dx": 0.5},
        "t_end": 5.0,
        "initial": {"kind": "front", "x0": 10.0},
        "snapshot_times": [2.5, 5.0],
    })
    out = run_cli(["simulate", "--config", cfg, "--out", str(tmp_path / "s")],
                  cwd=tmp_path)
    assert out.returncode == 0, out.stderr
    rows = (tmp_path / "s" / "snapshots.csv").read_text().splitlines()
    assert rows[0] == "t,x,u_1"
    assert len(rows) == 1 + 3 * 81  # initial state plus two snapshots
    manifest = (tmp_path / "s" / "manifest.txt").read_text()
    assert "status = ok" in manifest


def test_simulate_rejects_unknown_initial_kind(tmp_path):
    cfg = write_config(tmp_path, "sim.json", {
        "system": SCALAR,
        "grid": {"x_max": 10.0, "dx": 0.5},
        "t_end": 1.0,
        "initial": {"kind": "gaussian"},
    })
    out = run_cli(["simulate", "--config", cfg, "--out", str(tmp_path / "s")],
                  cwd=tmp_path)
    assert out.returncode == 2


def test_wave_profile_outputs(tmp_path):
    cfg = write_config(tmp_path, "wave.json", {"system": SCALAR, "c": 2.0})
    out = run_cli(["wave", "--config", cfg, "--out", str(tmp_path / "w")],
                  cwd=tmp_path)
    assert out.returncode == 0, out.stderr
    sidecar = json.loads((tmp_path / "w" / "wave.json").read_text())
    assert sidecar["c"] == 2.0
    assert sidecar["residual"] <= 1e-8
    energy = (tmp_path / "w" / "energy.txt").read_text()
    assert "slack = " in energy
    header = (tmp_path / "w" / "profile.csv").read_text().splitlines()[0]
    assert header == "xi,p_1"


def test_wave_subcritical_is_solver_error(tmp_path):
    cfg = write_config(tmp_path, "wave.json", {"system": SCALAR, "c": 1.0})
    out = run_cli(["wave", "--config", cfg, "--out", str(tmp_path / "w")],
                  cwd=tmp_path)
    assert out.returncode == 4
    manifest = (tmp_path / "w" / "manifest.txt").read_text()
    assert "status = no-profile" in manifest


def test_continuum_preset_run(tmp_path):
    cfg = write_config(tmp_path, "cont.json", {
        "preset": {"name": "cane_toads", "theta_lo": 1.0, "theta_hi": 2.0,
                   "alpha": 0.1},
        "n_bins": 8, "domain_length": 200.0, "t_end": 30.0, "dx": 0.5,
    })
    out = run_cli(["continuum", "--config", cfg, "--out", str(tmp_path / "c")],
                  cwd=tmp_path)
    assert out.returncode == 0, out.stderr
    assumptions = (tmp_path / "c" / "assumptions.txt").read_text()
    assert assumptions.count("= holds") == 8
    wake = (tmp_path / "c" / "wake.txt").read_text()
    assert "verdict = converged" in wake


def test_malformed_configs_are_usage_errors(tmp_path):
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    out = run_cli(["check", "--config", str(bad)], cwd=tmp_path)
    assert out.returncode == 2
    out = run_cli(["check", "--config", str(tmp_path / "missing.json")],
                  cwd=tmp_path)
    assert out.returncode == 2
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2, 3]")
    out = run_cli(["check", "--config", str(arr)], cwd=tmp_path)
    assert out.returncode == 2
    cfg = write_config(tmp_path, "nok.json", {"system": {"n2": {"gamma": 0.3}}})
    out = run_cli(["check", "--config", cfg], cwd=tmp_path)
    assert out.returncode == 2


def test_unknown_subcommand_is_usage_error(tmp_path):
    out = run_cli(["explode"], cwd=tmp_path)
    assert out.returncode == 2


def test_out_dir_resolution(tmp_path):
    cfg = write_config(tmp_path, "c.json", {"system": GOOD_SYSTEM})
    env_dir = tmp_path / "from_env"
    out = run_cli(["check", "--config", cfg], cwd=tmp_path,
                  env_extra={"KPPFRONTS_OUT": str(env_dir)})
    assert out.returncode == 0, out.stderr
    assert (env_dir / "report.txt").exists()
    # an explicit --out wins over the environment
    flag_dir = tmp_path / "from_flag"
    out = run_cli(["check", "--config", cfg, "--out", str(flag_dir)],
                  cwd=tmp_path, env_extra={"KPPFRONTS_OUT": str(env_dir / "x")})
    assert out.returncode == 0, out.stderr
    assert (flag_dir / "report.txt").exists()
    assert not (env_dir / "x").exists()
