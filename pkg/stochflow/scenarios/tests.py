import csv
import json

import numpy as np
import pytest
from django.core.management import call_command
from rest_framework import serializers

from stochflow.fields.catalog import GaussianBlob
from stochflow.fields.domain import Domain
from stochflow.fields.grid import GridField
from stochflow.scenarios.checks import check_output_root, check_solver_apps
from stochflow.scenarios.runner import (EXIT_INVALID, EXIT_NUMERICAL,
                                        EXIT_OK, EXIT_STRICT, run_scenario,
                                        validate_config)
from stochflow.scenarios.serializers import flatten_errors

PROBES = [[x, y] for x in (-1.0, 0.0, 1.0) for y in (-1.0, 0.0, 1.0)]


def heat_kernel_config(**overrides):
    config = {
        "mode": "transport2d",
        "domain": {"kind": "free-space"},
        "physics": {"nu": 0.1},
        "velocity": {"name": "ZeroVelocity", "params": {"dim": 2}},
        "initial": {"name": "GaussianBlob", "params": {"sigma": 0.5}},
        "time": {"horizon": 1.0, "dt": 0.25},
        "sampling": {"points": PROBES},
        "mc": {"n_paths": 20000, "seed": 7},
        "output": {"plots": False},
        "oracle": True,
    }
    config.update(overrides)
    return config


def write_config(directory, config, name="scenario.json"):
    path = directory / name
    path.write_text(json.dumps(config))
    return path


def read_rows(path):
    with open(path) as handle:
        return list(csv.DictReader(handle))


def run_command(*args):
    """Exit status of the scenario command."""
    try:
        call_command("scenario", *[str(a) for a in args])
    except SystemExit as exit:
        return exit.code
    return 0


def test_heat_kernel_transport_matches_oracle(tmp_path):
    path = write_config(tmp_path, heat_kernel_config())
    assert run_command("run", path, "--output-dir", tmp_path / "out") == 0
    rows = read_rows(tmp_path / "out" / "estimates.csv")
    assert len(rows) == 9
    assert list(rows[0]) == ["x", "y", "component", "estimate", "stderr",
                             "n_paths", "n_excluded"]
    expected = GaussianBlob(sigma=0.5).diffused(0.1, 1.0)(np.array(PROBES))
    estimates = np.array([float(r["estimate"]) for r in rows])
    stderr = np.array([float(r["stderr"]) for r in rows])
    assert np.all(np.abs(estimates - expected) < 4 * stderr)
    oracle = read_rows(tmp_path / "out" / "oracle.csv")
    assert all(abs(float(r["z"])) < 4 for r in oracle)


def test_metadata_describes_the_run(tmp_path):
    path = write_config(tmp_path, heat_kernel_config(oracle=False))
    assert run_command("run", path, "--output-dir", tmp_path / "out") == 0
    metadata = json.loads((tmp_path / "out" / "metadata.json").read_text())
    assert metadata["exit_code"] == 0
    assert metadata["rng"]["algorithm"] == "philox4x64-10"
    assert metadata["rng"]["master_seed"] == 7
    assert metadata["config"]["mc"]["antithetic"] is False
    assert metadata["config"]["schema_version"] == 1
    assert "SDE_PATHS_PER_STREAM" in metadata["settings"]
    assert "SDE_WORKERS" not in metadata["settings"]
    assert "estimates.csv" in metadata["artifacts"]
    assert validate_config(metadata["config"]) == metadata["config"]


def test_negative_viscosity_is_a_schema_violation(tmp_path, capsys):
    config = heat_kernel_config(physics={"nu": -0.1})
    path = write_config(tmp_path, config)
    assert run_command("run", path, "--output-dir", tmp_path / "out") == (
        EXIT_INVALID)
    error = json.loads(capsys.readouterr().err.strip().splitlines()[0])
    assert error["code"] == "invalid-config"
    assert "physics.nu" in error["detail"]
    assert "physics.nu" in error["message"]
    saved = json.loads((tmp_path / "out" / "error.json").read_text())
    assert saved == error


def test_same_seed_gives_identical_files(tmp_path):
    path = write_config(tmp_path, heat_kernel_config(
        mc={"n_paths": 3000, "seed": 11, "antithetic": True}))
    assert run_command("run", path, "--output-dir", tmp_path / "a",
                       "--workers", 1) == 0
    assert run_command("run", path, "--output-dir", tmp_path / "b",
                       "--workers", 3) == 0
    for name in ("estimates.csv", "oracle.csv", "metadata.json"):
        first = (tmp_path / "a" / name).read_bytes()
        assert first == (tmp_path / "b" / name).read_bytes()


@pytest.mark.parametrize("change, path", [
    ({"mc": {"n_paths": 100, "n_path": 3}}, "mc.n_path"),
    ({"colour": "blue"}, "colour"),
    ({"domain": {"kind": "sphere"}}, "domain.kind"),
    ({"mc": {"n_paths": 101, "antithetic": True}}, "mc.n_paths"),
    ({"sampling": {"points": [[0.0, 0.0, 0.0]]}}, "sampling.points"),
    ({"initial": {"params": {"sigma": 0.5}}}, "initial"),
    ({"initial": {"grid": "missing.csv"}}, "initial.grid"),
    ({"time": {"horizon": 0.0, "dt": 0.25}}, "time.horizon"),
])
def test_invalid_configs_name_the_field(change, path):
    with pytest.raises(serializers.ValidationError) as error:
        validate_config(heat_kernel_config(**change))
    assert path in flatten_errors(error.value.detail)


def test_mode_requirements():
    config = heat_kernel_config(mode="ns")
    with pytest.raises(serializers.ValidationError) as error:
        validate_config(config)
    detail = error.value.detail
    assert "dtau" in detail["time"] and "shape" in detail["sampling"]
    with pytest.raises(serializers.ValidationError) as error:
        validate_config(heat_kernel_config(mode="dynamo"))
    assert "nu_m" in error.value.detail["physics"]


def test_resolved_config_round_trips():
    resolved = validate_config(heat_kernel_config())
    assert resolved["domain"] == {"kind": "free-space", "dim": 2,
                                  "period": pytest.approx(2 * np.pi),
                                  "extent": 5.0}
    assert resolved["mc"]["velocity_method"] == "auto"
    assert validate_config(resolved) == resolved
    assert validate_config(json.loads(json.dumps(resolved))) == resolved


def test_validate_command_prints_the_resolved_config(tmp_path, capsys):
    path = write_config(tmp_path, heat_kernel_config())
    assert run_command("validate", path) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["time"]["n_times"] == 5
    broken = write_config(tmp_path, {"mode": "transport2d"}, "broken.json")
    assert run_command("validate", broken) == EXIT_INVALID


def test_unreadable_config(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text("{not json")
    outcome = run_scenario(path, output_dir=str(tmp_path / "out"))
    assert outcome.exit_code == EXIT_INVALID
    assert outcome.error["detail"]["field"] == "config"


def test_grid_file_input(tmp_path):
    domain = Domain.free_space(2)
    GridField.sample(GaussianBlob(sigma=0.5), domain, (41, 41)).to_csv(
        str(tmp_path / "blob.csv"))
    config = heat_kernel_config(initial={"grid": "blob.csv"},
                                mc={"n_paths": 200})
    path = write_config(tmp_path, config)
    resolved = validate_config(config, base_dir=str(tmp_path))
    assert resolved["initial"]["grid"] == str(tmp_path / "blob.csv")
    outcome = run_scenario(path, output_dir=str(tmp_path / "out"))
    assert outcome.exit_code == 0

    missing = write_config(tmp_path, heat_kernel_config(
        initial={"grid": "missing.csv"}), "missing.json")
    outcome = run_scenario(missing, output_dir=str(tmp_path / "out2"))
    assert outcome.exit_code == EXIT_INVALID
    assert "initial.grid" in outcome.error["detail"]


def test_bad_catalog_parameters(tmp_path):
    config = heat_kernel_config(initial={"name": "GaussianBlob",
                                         "params": {"radius": 1.0}})
    outcome = run_scenario(write_config(tmp_path, config),
                           output_dir=str(tmp_path / "out"))
    assert outcome.exit_code == EXIT_INVALID
    assert outcome.error["detail"]["field"] == "initial.params"


def test_recovery_scenario(tmp_path):
    config = {
        "mode": "recover",
        "domain": {"kind": "free-space"},
        "initial": {"name": "GaussianBlob", "params": {"sigma": 0.5}},
        "sampling": {"points": [[1.0, 0.0], [0.0, 2.0]]},
        "mc": {"n_paths": 2000},
        "output": {"plots": True},
        "oracle": True,
    }
    outcome = run_scenario(write_config(tmp_path, config),
                           output_dir=str(tmp_path / "out"))
    assert outcome.exit_code == 0
    rows = read_rows(tmp_path / "out" / "estimates.csv")
    assert [r["component"] for r in rows] == ["0", "1", "0", "1"]
    assert (tmp_path / "out" / "estimates.png").exists()
    assert "oracle.csv" in outcome.artifacts


def test_navier_stokes_scenario(tmp_path):
    config = {
        "mode": "ns",
        "domain": {"kind": "periodic-torus"},
        "physics": {"nu": 0.1},
        "initial": {"name": "TaylorGreen2D", "params": {"nu": 0.1}},
        "time": {"horizon": 0.1, "dtau": 0.05, "dt": 0.05},
        "sampling": {"shape": [16, 16]},
        "mc": {"n_paths": 64, "seed": 3},
        "output": {"plots": True, "particles": 4},
    }
    outcome = run_scenario(write_config(tmp_path, config),
                           output_dir=str(tmp_path / "out"))
    assert outcome.exit_code == 0
    out = tmp_path / "out"
    diagnostics = read_rows(out / "diagnostics.csv")
    assert [float(r["time"]) for r in diagnostics] == pytest.approx(
        [0.0, 0.05, 0.1])
    assert "circulation_0" in diagnostics[0]
    vorticity = GridField.load(str(out / "vorticity.csv"))
    assert vorticity.shape == (16, 16)
    assert GridField.load(str(out / "velocity.csv")).components == 2
    particles = read_rows(out / "particles.csv")
    assert {r["particle"] for r in particles} == {"0", "1", "2", "3"}
    assert (out / "vorticity.png").exists()
    assert outcome.summary["n_steps"] == 2


def dynamo_config(**overrides):
    config = {
        "mode": "dynamo",
        "domain": {"kind": "periodic-torus"},
        "physics": {"nu_m": 0.1},
        "velocity": {"name": "ZeroVelocity", "params": {"dim": 3}},
        "initial": {"name": "FourierMode",
                    "params": {"wavevector": [1.0, 0.0, 0.0],
                               "amplitude": [0.0, 1.0, 0.0]}},
        "time": {"horizon": 1.0, "window": [0.5, 2.0]},
        "sampling": {"points": [[0.3, 1.0, 2.0], [1.7, 4.2, 0.5],
                                [5.0, 2.5, 3.9]]},
        "mc": {"n_paths": 2000, "seed": 5},
        "output": {"plots": False},
    }
    config.update(overrides)
    return config


def test_dynamo_scenario_fits_the_decay_rate(tmp_path):
    outcome = run_scenario(write_config(tmp_path, dynamo_config()),
                           output_dir=str(tmp_path / "out"))
    assert outcome.exit_code == 0
    rate = json.loads((tmp_path / "out" / "rate.json").read_text())
    assert rate["rate"] == pytest.approx(-0.1, abs=0.03)
    energy = read_rows(tmp_path / "out" / "energy.csv")
    assert len(energy) == 5
    assert list(energy[0]) == ["time", "energy", "energy_stderr", "fit"]


def test_zero_field_growth_rate_is_a_numerical_failure(tmp_path):
    config = dynamo_config(initial={"name": "ZeroVorticity",
                                    "params": {"dim": 3}},
                           mc={"n_paths": 100})
    outcome = run_scenario(write_config(tmp_path, config),
                           output_dir=str(tmp_path / "out"))
    assert outcome.exit_code == EXIT_NUMERICAL
    error = json.loads((tmp_path / "out" / "error.json").read_text())
    assert error["code"] == "indeterminate-rate"
    metadata = json.loads((tmp_path / "out" / "metadata.json").read_text())
    assert metadata["exit_code"] == EXIT_NUMERICAL


def driftless_config(**overrides):
    config = {
        "mode": "driftless-verify",
        "domain": {"kind": "free-space"},
        "physics": {"nu": 0.25},
        "velocity": {"name": "UniformVelocity",
                     "params": {"vector": [0.3, -0.2]}},
        "time": {"horizon": 0.5, "dt": 0.02},
        "sampling": {"points": [[0.0, 0.0]]},
        "mc": {"n_paths": 4000, "seed": 9},
    }
    config.update(overrides)
    return config


def test_driftless_scenario_writes_a_report(tmp_path):
    outcome = run_scenario(write_config(tmp_path, driftless_config()),
                           output_dir=str(tmp_path / "out"), strict=True)
    assert outcome.exit_code == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["passed"]
    assert len(report["laws"]["moments"]) == 14


def test_zero_horizon_driftless_run_is_invalid(tmp_path, capsys):
    config = driftless_config(time={"horizon": 0.0, "dt": 0.02})
    path = write_config(tmp_path, config)
    assert run_command("run", path, "--output-dir", tmp_path / "out") == (
        EXIT_INVALID)
    error = json.loads(capsys.readouterr().err.strip().splitlines()[0])
    assert error["code"] == "invalid-config"
    assert "time.horizon" in error["detail"]
    saved = json.loads((tmp_path / "out" / "error.json").read_text())
    assert saved == error


def under_resolved_config():
    return {
        "mode": "ns",
        "domain": {"kind": "periodic-torus"},
        "physics": {"nu": 0.1},
        "initial": {"name": "FourierMode", "params": {"wavevector": [7, 0]}},
        "time": {"horizon": 0.0, "dtau": 0.05},
        "sampling": {"shape": [16, 16]},
        "mc": {"n_paths": 16, "seed": 1},
        "output": {"plots": False},
    }


def test_resolution_warning_is_recorded(tmp_path):
    outcome = run_scenario(write_config(tmp_path, under_resolved_config()),
                           output_dir=str(tmp_path / "out"))
    assert outcome.exit_code == EXIT_OK
    metadata = json.loads((tmp_path / "out" / "metadata.json").read_text())
    assert "ResolutionWarning" in [w["category"]
                                   for w in metadata["warnings"]]
    assert not (tmp_path / "out" / "error.json").exists()


def test_strict_mode_fails_on_resolution_warning(tmp_path):
    path = write_config(tmp_path, under_resolved_config())
    assert run_command("run", path, "--strict", "--output-dir",
                       tmp_path / "out") == EXIT_STRICT
    error = json.loads((tmp_path / "out" / "error.json").read_text())
    assert error["code"] == "strict"
    assert error["detail"]["warnings"][0]["category"] == "ResolutionWarning"
    metadata = json.loads((tmp_path / "out" / "metadata.json").read_text())
    assert metadata["exit_code"] == EXIT_STRICT


def test_system_checks_pass():
    assert check_solver_apps(None) == []
    assert check_output_root(None) == []
