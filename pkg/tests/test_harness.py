import json
import os

import numpy as np
import pytest

from frontlab import analysis, cli, harness
from frontlab.errors import ConfigError


def test_run_experiment_nagumo_profile(tmp_path):
    rep = harness.run_experiment("nagumo-profile", out_dir=str(tmp_path))
    assert rep["pass"]
    assert abs(rep["metrics"]["c"] - 0.2 * np.sqrt(2)) < 1e-6
    assert (tmp_path / "nagumo-profile" / "report.json").exists()
    assert (tmp_path / "nagumo-profile" / "profile.csv").exists()


def test_run_experiment_deterministic():
    a = harness.run_experiment("nagumo-profile")
    b = harness.run_experiment("nagumo-profile")
    assert analysis.canonical_json(a) == analysis.canonical_json(b)


def test_unknown_experiment_lists_available():
    with pytest.raises(ConfigError) as info:
        harness.run_experiment("warp-drive")
    assert "nagumo-profile" in str(info.value)


def test_malformed_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        harness.load_config(str(bad), experiment="nagumo-profile")
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        harness.load_config(str(arr), experiment="nagumo-profile")
    versioned = tmp_path / "v9.json"
    versioned.write_text(json.dumps({"version": 9}))
    with pytest.raises(ConfigError):
        harness.load_config(str(versioned), experiment="nagumo-profile")


def test_config_merge(tmp_path):
    user = tmp_path / "cfg.json"
    user.write_text(json.dumps({"tolerances": {"speed": 0.5}}))
    cfg = harness.load_config(str(user), experiment="nagumo-profile")
    assert cfg["tolerances"]["speed"] == 0.5
    assert cfg["tolerances"]["profile"] == 1e-6
    assert cfg["model"]["name"] == "nagumo"


def test_config_validation_partial_grid():
    with pytest.raises(ConfigError):
        harness.run_experiment(
            "nagumo-profile", overrides={"grid1d": {"n_z": None}})


def test_suite_subset(tmp_path, capsys):
    ok, reports = harness.suite(["nagumo-profile", "cole-hopf-xcheck"],
                                out_dir=str(tmp_path))
    out = capsys.readouterr().out
    assert ok
    assert len(reports) == 2
    assert "[PASS] nagumo-profile:speed_error" in out
    assert "suite: PASS (2/2 experiments)" in out


def test_cli_profile_and_exit_codes(tmp_path):
    out = tmp_path / "p"
    out.mkdir()
    code = cli.main(["profile", "--out", str(out) + os.sep,
                     "--config", "/nonexistent.json"])
    assert code == 2  # unreadable config is a config error
    cfgfile = tmp_path / "small.json"
    cfgfile.write_text(json.dumps(
        {"grid1d": {"z_min": -40.0, "z_max": 40.0, "n_z": 512}}))
    code = cli.main(["profile", "--config", str(cfgfile),
                     "--out", str(out) + os.sep])
    assert code == 0
    payload = json.loads((out / "profile.json").read_text())
    assert abs(payload["c"] - 0.2 * np.sqrt(2)) < 1e-5
    assert len(payload["phi"]) == 512


def test_cli_dispersion(tmp_path):
    cfgfile = tmp_path / "small.json"
    cfgfile.write_text(json.dumps(
        {"grid1d": {"z_min": -50.0, "z_max": 50.0, "n_z": 512}}))
    code = cli.main(["dispersion", "--config", str(cfgfile),
                     "--out", str(tmp_path), "--kmax", "0.2", "--nk", "5"])
    assert code == 0
    lines = (tmp_path / "dispersion_curve.csv").read_text().splitlines()
    assert lines[0] == "k,re_lambda_c,im_lambda_c"
    assert len(lines) == 6


def test_cli_unknown_experiment_config():
    code = cli.main(["suite", "warp-drive"])
    assert code == 2
