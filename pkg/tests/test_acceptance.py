"""Acceptance suite: one test per verification target, production settings.

Each test executes the corresponding registered experiment at its default
(desk-scale) configuration, prints one line per criterion, and fails if
any criterion misses its pinned tolerance.  The heavy tracked runs are
shared between the stability, Lyapunov, and effective-dynamics checks.
"""
import pytest

from frontlab.harness import run_experiment


def _assert_all(report, names=None):
    rows = report["criteria"]
    if names is not None:
        rows = [c for c in rows if any(n in c["name"] for n in names)]
    assert rows, "no criteria matched"
    for c in rows:
        status = "PASS" if c["pass"] else "FAIL"
        print(f"[{status}] {report['experiment']}:{c['name']} "
              f"value={c['value']:.6g} threshold={c['threshold']}")
    assert all(c["pass"] for c in rows), \
        f"failed: {[c['name'] for c in rows if not c['pass']]}"


@pytest.fixture(scope="module")
def verify_main_report():
    return run_experiment("verify-main")


def test_01_front_oracle():
    _assert_all(run_experiment("nagumo-profile"))


def test_02_coefficient_identities():
    _assert_all(run_experiment("coefficients"))


def test_03_dispersion_consistency():
    _assert_all(run_experiment("didentity-dispersion"))
    _assert_all(run_experiment("fhn-dispersion"))


def test_04_semigroup_decomposition():
    _assert_all(run_experiment("semigroup-remainder"))


def test_05_theorem_main_envelopes(verify_main_report):
    _assert_all(verify_main_report,
                names=("v_ring_envelope", "grad_sigma_exponent",
                       "lap_sigma_exponent", "sigma_bound"))


def test_06_lyapunov_stability(verify_main_report):
    _assert_all(verify_main_report, names=("lyapunov", "linear_response"))


def test_07_effective_hj_dynamics():
    _assert_all(run_experiment("verify-hj"))


def test_08_oscillating_counterexample():
    _assert_all(run_experiment("oscillate"))


def test_09_transverse_localization():
    _assert_all(run_experiment("localized-decay"))


def test_10_cole_hopf_cross_validation():
    _assert_all(run_experiment("cole-hopf-xcheck"))


def test_11_heat_bounds():
    _assert_all(run_experiment("heat-bounds"))
