import numpy as np
import pytest

import frontlab as fl
from frontlab.profile import adjoint_eigenfunction, coefficients


@pytest.fixture(scope="session")
def nagumo_pack():
    model = fl.make_nagumo(0.3)
    grid = fl.Grid1D(-50.0, 50.0, 1024)
    prof = fl.solve_front(model, grid)
    adj = adjoint_eigenfunction(model, prof)
    d_perp, nld = coefficients(model, prof, adj)
    return model, prof, adj, d_perp, nld


@pytest.fixture(scope="session")
def nagumo_sym_pack():
    model = fl.make_nagumo(0.5)
    grid = fl.Grid1D(-50.0, 50.0, 1024)
    prof = fl.solve_front(model, grid)
    adj = adjoint_eigenfunction(model, prof)
    d_perp, nld = coefficients(model, prof, adj)
    return model, prof, adj, d_perp, nld


@pytest.fixture(scope="session")
def fhn_pack():
    model = fl.make_fhn()
    grid = fl.Grid1D(-80.0, 80.0, 1024)
    prof = fl.solve_front(model, grid)
    adj = adjoint_eigenfunction(model, prof, tail_tol=1e-6)
    d_perp, nld = coefficients(model, prof, adj)
    return model, prof, adj, d_perp, nld


@pytest.fixture(scope="session")
def nagumo_small():
    """Coarse front for 2D runs where speed matters more than accuracy."""
    model = fl.make_nagumo(0.3)
    grid = fl.Grid1D(-50.0, 50.0, 512)
    prof = fl.solve_front(model, grid)
    adj = adjoint_eigenfunction(model, prof, tail_tol=1e-6)
    d_perp, nld = coefficients(model, prof, adj)
    return model, prof, adj, d_perp, nld


def rng(seed=0):
    return np.random.default_rng(seed)
