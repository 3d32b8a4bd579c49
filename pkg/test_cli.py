import json
import math

import pandas as pd
import pytest

from wavelab.experiments import read_manifest
from wavelab.main import EXIT_CONFIG, EXIT_FAILURE, EXIT_OK, main

SMALL_GRID = """grid.mode = radial1d
grid.n = {n}
grid.box_length = 40
time.snapshots = 9
output.formats = csv, json
"""


def write_config(tmp_path, body, name="run.cfg", n=64):
    path = tmp_path / name
    path.write_text(SMALL_GRID.format(n=n) + body, encoding="utf-8")
    return path


def run_dirs(root):
    return sorted(p for p in root.iterdir() if p.is_dir())


def invoke(tmp_path, *args):
    out = tmp_path / "runs"
    code = main([*args, "--out", str(out), "--log-level", "WARNING"])
    return code, out


def test_check_exponents_from_flags(tmp_path):
    code, out = invoke(tmp_path, "check-exponents", "--alpha", "1/2", "--b", "1/2")
    assert code == EXIT_OK
    [run] = run_dirs(out)
    assert run.name.startswith("check-exponents-")
    manifest = read_manifest(run)
    assert manifest.success and not manifest.partial
    assert manifest.derived["theta1"] == "7/4"
    assert manifest.derived["theta2"] == "1"
    assert (run / "exponents.json").exists()
    assert (run / "report.md").read_text(encoding="utf-8").startswith("# Wave Laboratory Run: check-exponents")
    assert len(pd.read_csv(run / "exponent_sweep.csv")) == 100 * 100
    region = pd.read_csv(run / "region_sweep.csv", dtype=str)
    assert len(set(zip(region["alpha"], region["b"]))) == 100
    record = json.loads((run / "exponents.json").read_text(encoding="utf-8"))
    assert record["region_sweep"]["points"] == 100
    assert record["region_sweep"]["theta1_counterexamples"] == []
    assert record["region_sweep"]["theta2_counterexamples"] == []


def test_check_exponents_reports_ineligible_parameters(tmp_path):
    code, out = invoke(tmp_path, "check-exponents", "--alpha", "2", "--b", "1")
    assert code == EXIT_FAILURE
    manifest = read_manifest(run_dirs(out)[0])
    assert "α < (4−2b)/3 violated" in manifest.summary["violations"]


def test_config_errors_exit_before_any_run(tmp_path):
    path = write_config(tmp_path, "eq.alphaa = 1\n")
    code, out = invoke(tmp_path, "picard", "--config", str(path))
    assert code == EXIT_CONFIG
    assert not out.exists() or not run_dirs(out)


def test_ineligible_picard_config_exits_with_config_code(tmp_path):
    path = write_config(tmp_path, "eq.alpha = 2\neq.b = 1\n")
    code, _ = invoke(tmp_path, "picard", "--config", str(path))
    assert code == EXIT_CONFIG


def test_unknown_log_level(tmp_path):
    path = write_config(tmp_path, "")
    assert main(["picard", "--config", str(path), "--log-level", "LOUD"]) == EXIT_CONFIG


def test_config_is_required(tmp_path):
    with pytest.raises(SystemExit):
        main(["picard", "--out", str(tmp_path)])


def test_picard_on_zero_data(tmp_path):
    path = write_config(tmp_path, "data.profile = zero\n")
    code, out = invoke(tmp_path, "picard", "--config", str(path))
    assert code == EXIT_OK
    [run] = run_dirs(out)
    frame = pd.read_csv(run / "picard.csv")
    assert list(frame.columns) == ["k", "d_k", "ratio_k", "ball_norm"]
    assert len(frame) == 1
    manifest = read_manifest(run)
    assert manifest.summary["outcome"] == "converged"
    assert manifest.summary["reference_gap"] == 0.0
    assert manifest.config["eq"]["alpha"] == "1/2"
    assert set(manifest.artifacts) == {"picard.csv", "picard.json"}


def test_picard_with_large_b(tmp_path):
    path = write_config(tmp_path, "eq.alpha = 1/10\neq.b = 7/4\ndata.profile = zero\n")
    code, out = invoke(tmp_path, "picard", "--config", str(path))
    assert code == EXIT_OK
    manifest = read_manifest(run_dirs(out)[0])
    assert manifest.summary["theta1"] == 1.95
    assert manifest.summary["theta2"] is None
    assert "theta2_error" in manifest.derived


def test_picard_fails_when_reference_gap_exceeds_tolerance(tmp_path):
    path = write_config(tmp_path, "data.amplitude = 0.05\ntime.T = 0.25\npicard.oracle_tol = 1e-15\n")
    code, out = invoke(tmp_path, "picard", "--config", str(path))
    assert code == EXIT_FAILURE
    manifest = read_manifest(run_dirs(out)[0])
    assert manifest.summary["outcome"] == "converged"
    assert manifest.summary["reference_gap"] > 1e-15
    assert any("picard.oracle_tol" in w for w in manifest.warnings)


def test_simulate_writes_energy_table(tmp_path):
    path = write_config(tmp_path, "time.T = 0.2\ntime.dt = 1e-3\n")
    code, out = invoke(tmp_path, "simulate", "--config", str(path))
    assert code == EXIT_OK
    run = run_dirs(out)[0]
    frame = pd.read_csv(run / "energy.csv")
    assert list(frame.columns) == ["t", "kinetic", "gradient", "potential", "total"]
    assert len(frame) == 9
    manifest = read_manifest(run)
    assert manifest.success
    assert manifest.summary["relative_drift"] <= 1e-4
    assert manifest.summary["observed_order"] >= 1.9
    assert manifest.summary["checks_failed"] == []


def test_simulate_fails_on_drift_tolerance(tmp_path):
    path = write_config(tmp_path, "time.T = 0.2\ntime.dt = 1e-3\ntime.drift_tol = 1e-15\n")
    code, out = invoke(tmp_path, "simulate", "--config", str(path))
    assert code == EXIT_FAILURE
    manifest = read_manifest(run_dirs(out)[0])
    assert not manifest.success and not manifest.partial
    assert any("time.drift_tol" in w for w in manifest.warnings)


def test_simulate_reports_full3d_gap(tmp_path):
    path = tmp_path / "matched.cfg"
    path.write_text(
        "grid.mode = radial1d\ngrid.n = 32\ngrid.box_length = 32\ngrid.compare_full3d = true\n"
        "eq.epsilon = 0\ndata.profile = gaussian\ndata.width = 2.5\n"
        "time.T = 0.2\ntime.dt = 1e-3\ntime.snapshots = 9\noutput.formats = csv, json\n",
        encoding="utf-8",
    )
    code, out = invoke(tmp_path, "simulate", "--config", str(path))
    assert code == EXIT_OK
    gap = read_manifest(run_dirs(out)[0]).summary["full3d_axis_gap"]
    assert 0 <= gap < 5e-2


def test_full3d_comparison_needs_radial_grid(tmp_path):
    path = tmp_path / "box.cfg"
    path.write_text("grid.mode = full3d\ngrid.n = 16\ngrid.compare_full3d = true\n", encoding="utf-8")
    code, _ = invoke(tmp_path, "simulate", "--config", str(path))
    assert code == EXIT_CONFIG


def test_continue_reaches_horizon(tmp_path):
    path = write_config(tmp_path, "data.amplitude = 0.01\ntime.T = 0.25\ntime.horizon = 0.5\n")
    code, out = invoke(tmp_path, "continue", "--config", str(path))
    assert code == EXIT_OK
    assert len(pd.read_csv(run_dirs(out)[0] / "intervals.csv")) >= 2


def test_norm_survey(tmp_path):
    path = write_config(tmp_path, "", n=128)
    code, out = invoke(tmp_path, "norms", "--config", str(path))
    assert code == EXIT_OK
    run = run_dirs(out)[0]
    frame = pd.read_csv(run / "norms.csv")
    values = dict(zip(frame["quantity"], frame["value"]))
    assert "data_norm_H1xL2" in values
    assert 1 / math.sqrt(2) - 1e-9 <= values["besov_over_l2"] <= 1 + 1e-9
    assert values["besov_dilation_drift"] <= 0.15
    assert read_manifest(run).summary["checks_failed"] == []


def test_probe_requires_seed(tmp_path):
    path = write_config(tmp_path, "probes.name = strichartz\nprobes.samples = 8\n")
    code, _ = invoke(tmp_path, "probe", "--config", str(path))
    assert code == EXIT_CONFIG


def test_probe_runs_are_reproducible(tmp_path):
    path = write_config(tmp_path, "probes.name = besov_embedding\nprobes.family = gaussian\nprobes.samples = 8\n", n=128)
    first, out = invoke(tmp_path, "probe", "--config", str(path), "--seed", "3")
    second, _ = invoke(tmp_path, "probe", "--config", str(path), "--seed", "3")
    assert first == second == EXIT_OK
    a, b = run_dirs(out)
    assert (a / "probe_besov_embedding.csv").read_bytes() == (b / "probe_besov_embedding.csv").read_bytes()
    manifest = read_manifest(a)
    assert manifest.seed == 3
    assert manifest.summary["besov_embedding"]["dilation_passed"]


def test_sweep_writes_one_manifest_per_point(tmp_path):
    path = write_config(tmp_path, "data.amplitude = 0.05\nsweep.t_values = 0.4, 0.2, 0.1\n")
    code, out = invoke(tmp_path, "sweep", "--config", str(path))
    assert code == EXIT_OK
    [run] = run_dirs(out)
    points = run_dirs(run)
    assert len(points) == 3
    assert all((p / "manifest.json").exists() for p in points)
    frame = pd.read_csv(run / "sweep.csv")
    assert list(frame["T"]) == [0.4, 0.2, 0.1]
    assert all(frame["outcome"] == "converged")
    assert len(read_manifest(run).summary["slopes"]) == 2
