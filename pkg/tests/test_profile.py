import numpy as np
import pytest

import frontlab as fl
from frontlab.analysis import best_shift_error
from frontlab.errors import NoConvergenceError
from frontlab.profile import (adjoint_eigenfunction, coefficients,
                              default_guess, operator_matrix, solve_front)

C_EXACT = np.sqrt(2.0) * (0.5 - 0.3)


def nagumo_closed_form(z):
    return 1.0 / (1.0 + np.exp(z / np.sqrt(2.0)))


def test_speed_against_closed_form(nagumo_pack):
    _, prof, *_ = nagumo_pack
    assert abs(prof.c - C_EXACT) < 1e-8


def test_profile_against_closed_form(nagumo_pack):
    _, prof, *_ = nagumo_pack
    err, shift = best_shift_error(prof.grid.z, prof.phi[:, 0],
                                  nagumo_closed_form)
    assert err < 1e-7
    assert abs(shift) < 1e-3


def test_symmetric_front_is_stationary(nagumo_sym_pack):
    _, prof, *_ = nagumo_sym_pack
    assert abs(prof.c) < 1e-8


def test_fhn_speed_grid_consistency(fhn_pack):
    model, prof, *_ = fhn_pack
    coarse = solve_front(model, fl.Grid1D(-80.0, 80.0, 512))
    assert abs(coarse.c - prof.c) / abs(prof.c) < 5e-5


def test_translation_gauge(nagumo_pack):
    model, prof, *_ = nagumo_pack
    grid = prof.grid
    shifted = nagumo_closed_form(grid.z - 3.0)[:, None]
    again = solve_front(model, grid, guess=(shifted, 0.1))
    assert abs(again.c - prof.c) < 1e-10
    assert np.max(np.abs(again.phi - prof.phi)) < 1e-9


def test_newton_divergence_reports_residual(nagumo_pack):
    model, prof, *_ = nagumo_pack
    wiggly = nagumo_closed_form(prof.grid.z) \
        + 0.4 * np.sin(3.0 * prof.grid.z) * np.exp(-(prof.grid.z / 20.0) ** 2)
    with pytest.raises(NoConvergenceError) as info:
        solve_front(model, prof.grid, guess=(wiggly[:, None], 0.0), max_iter=2)
    assert info.value.last_residual is not None


def test_second_order_convergence_factor():
    # halving h must cut the closed-form error by at least 3.5
    model = fl.make_nagumo(0.3)
    errs = []
    for n_z in (512, 1024):
        prof = solve_front(model, fl.Grid1D(-50.0, 50.0, n_z))
        err, _ = best_shift_error(prof.grid.z, prof.phi[:, 0],
                                  nagumo_closed_form)
        errs.append(err)
    assert errs[0] / errs[1] >= 3.5


def test_kernel_identity(nagumo_pack):
    model, prof, *_ = nagumo_pack
    A = operator_matrix(model, prof)
    resid = np.max(np.abs(A @ prof.dphi.ravel()))
    assert resid <= 10.0 * prof.grid.h**2


def test_adjoint_selfadjoint_case(nagumo_sym_pack):
    _, prof, adj, *_ = nagumo_sym_pack
    w = prof.grid.trapz_weights()
    ref = prof.dphi / np.sum(w[:, None] * prof.dphi**2)
    assert np.max(np.abs(adj.estar - ref)) < 1e-6


def test_adjoint_closed_form(nagumo_pack):
    _, prof, adj, *_ = nagumo_pack
    w = prof.grid.trapz_weights()
    ref = np.exp(prof.c * prof.grid.z)[:, None] * prof.dphi
    ref /= np.sum(w[:, None] * ref * prof.dphi)
    assert np.max(np.abs(adj.estar - ref)) < 1e-5
    assert adj.normalization_error < 1e-8
    assert adj.tail < 1e-8


def test_adjoint_residual_and_tails(fhn_pack):
    _, prof, adj, *_ = fhn_pack
    assert adj.residual < 1e-6
    assert adj.normalization_error < 1e-8


def test_dperp_identity_for_unit_diffusion(nagumo_pack):
    *_, d_perp, nld = nagumo_pack
    assert abs(d_perp - 1.0) < 1e-10


def test_speed_identity_residual_refines():
    model = fl.make_nagumo(0.3)
    vals = []
    for n_z in (512, 1024):
        prof = solve_front(model, fl.Grid1D(-50.0, 50.0, n_z))
        adj = adjoint_eigenfunction(model, prof, tail_tol=1e-6)
        vals.append(coefficients(model, prof, adj)[1])
    assert vals[1] < 1e-6
    assert vals[0] / vals[1] >= 3.0


def test_fhn_speed_identity(fhn_pack):
    *_, nld = fhn_pack
    assert nld < 1e-5


def test_derivatives_consistent_with_centered_differences(nagumo_pack):
    _, prof, *_ = nagumo_pack
    h = prof.grid.h
    centered = (prof.phi[2:] - prof.phi[:-2]) / (2 * h)
    assert np.max(np.abs(prof.dphi[1:-1] - centered)) < 5.0 * h**2


def test_default_guess_respects_end_states(fhn_pack):
    model, prof, *_ = fhn_pack
    phi0, c0 = default_guess(model, prof.grid)
    assert np.allclose(phi0[0], model.phi_minus, atol=1e-10)
    assert np.allclose(phi0[-1], model.phi_plus, atol=1e-10)
