import json
import os

import numpy as np
import pytest

from frontlab import analysis
from frontlab.errors import FitDomainError, OutOfMarginError
from frontlab.grids import Field2D, Grid2D
from frontlab.simulator import make_perturbation


def test_fit_power_exact():
    t = np.linspace(5, 100, 60)
    fit = analysis.fit_decay(t, (1 + t) ** -1.0, "power")
    assert fit.exponent == pytest.approx(1.0, abs=0.01)
    fit2 = analysis.fit_decay(t, 3.0 * (1 + t) ** -0.5, "power")
    assert fit2.exponent == pytest.approx(0.5, abs=0.01)
    assert fit2.amplitude == pytest.approx(3.0, rel=0.01)


def test_fit_power_log_exact():
    t = np.linspace(5, 100, 60)
    v = (1 + t) ** -1.0 * np.log(2 + t)
    fit = analysis.fit_decay(t, v, "power_log")
    assert fit.log_corrected
    assert fit.bounded_ratio <= 1.01


def test_fit_scale_equivariant():
    t = np.linspace(5, 100, 40)
    v = 2.3 * (1 + t) ** -0.8 * (1 + 0.05 * np.sin(t))
    a = analysis.fit_decay(t, v, "power")
    b = analysis.fit_decay(t, 7.0 * v, "power")
    assert abs(a.exponent - b.exponent) < 1e-12
    assert abs(a.bounded_ratio - b.bounded_ratio) < 1e-12


def test_fit_domain_errors():
    t = np.linspace(5, 100, 40)
    with pytest.raises(FitDomainError):
        analysis.fit_decay(t, np.zeros_like(t), "power")
    with pytest.raises(FitDomainError):
        analysis.fit_decay(t[:5], np.ones(5), "power", window=(0, 200))
    with pytest.raises(FitDomainError):
        analysis.fit_decay(t, np.ones_like(t), "cubic_spline")


def test_envelope_constant():
    t = np.array([5.0, 10.0, 20.0])
    v = np.array([1.0, 0.5, 0.25])
    m = np.array([0.5, 0.5, 0.5])
    assert analysis.envelope_constant(t, v, m) == pytest.approx(2.0)


def test_interface_estimate_front_and_translate(nagumo_small):
    model, prof, adj, *_ = nagumo_small
    grid = Grid2D(80.0, 32, prof.grid)
    u = Field2D(grid, np.broadcast_to(prof.phi[None],
                                      (32, prof.grid.n_z, 1)).copy())
    est = analysis.interface_estimate(u, prof, adj)
    assert np.max(np.abs(est)) < 1e-10
    s = 0.01
    ut = make_perturbation("translation", model, prof, grid, 0.2, s=s)
    est_t = analysis.interface_estimate(ut, prof, adj)
    assert np.max(np.abs(est_t - s)) < 1e-4


def test_interface_estimate_linear(nagumo_small):
    model, prof, adj, *_ = nagumo_small
    grid = Grid2D(80.0, 32, prof.grid)
    rng = np.random.default_rng(5)
    w = np.exp(-(prof.grid.z / 10.0) ** 2)[None, :, None] \
        * rng.standard_normal((32, 1, 1))
    u = Field2D(grid, prof.phi[None] + w)
    base = Field2D(grid, prof.phi[None] + 0.0 * w)
    from frontlab.profile import pair_z
    delta = analysis.interface_estimate(u, prof, adj) \
        - analysis.interface_estimate(base, prof, adj)
    assert np.max(np.abs(delta + pair_z(adj.weighted(), w))) < 1e-13


def test_compare_modulated_exact_cases(nagumo_small):
    model, prof, *_ = nagumo_small
    grid = Grid2D(80.0, 32, prof.grid)
    u = Field2D(grid, np.broadcast_to(prof.phi[None],
                                      (32, prof.grid.n_z, 1)).copy())
    assert analysis.compare_modulated(u, np.zeros(32), prof) < 1e-14
    s = 0.05
    ut = make_perturbation("translation", model, prof, grid, 0.2, s=s)
    assert analysis.compare_modulated(ut, np.full(32, s), prof) < 1e-6
    with pytest.raises(OutOfMarginError):
        analysis.compare_modulated(u, np.full(32, 30.0), prof)


def test_best_shift_error_recovers_shift():
    z = np.linspace(-30, 30, 2001)

    def ref(x):
        return np.tanh(x)

    vals = np.tanh(z - 0.123)
    err, s = analysis.best_shift_error(z, vals, ref)
    assert s == pytest.approx(0.123, abs=1e-9)
    assert err < 1e-12


def test_canonical_json_deterministic():
    a = {"b": 1.0 / 3.0, "a": [1, 2, {"x": True, "y": None}]}
    b = {"a": [1, 2, {"y": None, "x": True}], "b": 1.0 / 3.0}
    assert analysis.canonical_json(a) == analysis.canonical_json(b)
    assert "0.33333333333333331" in analysis.canonical_json(a)
    assert json.loads(analysis.canonical_json(a))["b"] == pytest.approx(1 / 3)


def test_config_hash_changes_with_content():
    h1 = analysis.config_hash({"a": 1})
    h2 = analysis.config_hash({"a": 2})
    assert h1 != h2 and len(h1) == 64


def test_make_report_pass_logic():
    crits = [{"name": "x", "value": 0.5, "threshold": 1.0, "op": "<="},
             {"name": "y", "value": 0.5, "threshold": [0.0, 1.0], "op": "in"}]
    rep = analysis.make_report("demo", {"seed": 1}, {}, crits)
    assert rep["pass"]
    crits[0]["value"] = 2.0
    rep2 = analysis.make_report("demo", {"seed": 1}, {}, crits)
    assert not rep2["pass"]
    assert rep2["criteria"][0]["pass"] is False


def test_write_report_byte_identical(tmp_path):
    rep = analysis.make_report("demo", {"seed": 1}, {"m": 0.1},
                               [{"name": "x", "value": 0.5, "threshold": 1.0,
                                 "op": "<="}])
    d1, d2 = tmp_path / "a", tmp_path / "b"
    analysis.write_report(rep, str(d1),
                          csv_tables={"t.csv": (("t", "v"), [(0.0, 1.0)])})
    analysis.write_report(rep, str(d2),
                          csv_tables={"t.csv": (("t", "v"), [(0.0, 1.0)])})
    assert (d1 / "report.json").read_bytes() == (d2 / "report.json").read_bytes()
    assert (d1 / "t.csv").read_bytes() == (d2 / "t.csv").read_bytes()


def test_empty_report_valid():
    rep = analysis.make_report("empty", {}, {}, [])
    assert rep["pass"] and rep["criteria"] == []


def test_golden_digest_nagumo_profile():
    # first-run snapshot of the reference profile report
    from frontlab.harness import run_experiment
    rep = run_experiment("nagumo-profile")
    digest = analysis.config_hash(rep)
    path = os.path.join(os.path.dirname(__file__), "data",
                        "nagumo_profile.sha256")
    with open(path) as fh:
        assert digest == fh.read().strip()
