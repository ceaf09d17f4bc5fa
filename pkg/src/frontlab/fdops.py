"""Finite-difference operator assembly on uniform z grids.

Interior rows carry fourth-order centered stencils; the two rows nearest
each end fall back to second order, where the front tails are flat and the
extra truncation error is exponentially small.  Rows at the very ends close
the stencil with Dirichlet-zero ghost values.
"""
import numpy as np
import scipy.sparse as sp

_S1_2 = np.array([-0.5, 0.0, 0.5])
_S2_2 = np.array([1.0, -2.0, 1.0])
_S1_4 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_S2_4 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def _assemble(n, h, stencil2, stencil4, scale, order):
    rows, cols, vals = [], [], []

    def put(i, offs, st):
        for o, v in zip(offs, st):
            j = i + o
            if 0 <= j < n and v != 0.0:
                rows.append(i)
                cols.append(j)
                vals.append(v)

    for i in range(n):
        if order >= 4 and 2 <= i <= n - 3:
            put(i, range(-2, 3), stencil4)
        else:
            put(i, range(-1, 2), stencil2)
    A = sp.csr_matrix((np.array(vals) * scale, (rows, cols)), shape=(n, n))
    return A


def d1_matrix(grid, order=4):
    """First-derivative operator, ghost-Dirichlet-zero closure."""
    return _assemble(grid.n_z, grid.h, _S1_2, _S1_4, 1.0 / grid.h, order)


def d2_matrix(grid, order=4):
    """Second-derivative operator, ghost-Dirichlet-zero closure."""
    return _assemble(grid.n_z, grid.h, _S2_2, _S2_4, 1.0 / grid.h**2, order)


def apply_d1(values, h, order=4, axis=0):
    """Differentiate sampled columns; same stencils as :func:`d1_matrix`
    except the end rows use one-sided second-order closures (no ghosts)."""
    v = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    out = np.empty_like(v)
    if order >= 4 and v.shape[0] >= 7:
        out[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
        out[1] = (v[2] - v[0]) / (2 * h)
        out[-2] = (v[-1] - v[-3]) / (2 * h)
    else:
        out[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    out[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
    out[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return np.moveaxis(out, 0, axis)


def apply_d2(values, h, order=4, axis=0):
    v = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    out = np.empty_like(v)
    if order >= 4 and v.shape[0] >= 7:
        out[2:-2] = (-v[:-4] + 16 * v[1:-3] - 30 * v[2:-2]
                     + 16 * v[3:-1] - v[4:]) / (12 * h * h)
        out[1] = (v[0] - 2 * v[1] + v[2]) / (h * h)
        out[-2] = (v[-3] - 2 * v[-2] + v[-1]) / (h * h)
    else:
        out[1:-1] = (v[:-2] - 2 * v[1:-1] + v[2:]) / (h * h)
    out[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / (h * h)
    out[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / (h * h)
    return np.moveaxis(out, 0, axis)


def sparse_to_banded(A, kl, ku):
    """Pack a sparse banded matrix into LAPACK band storage."""
    A = A.tocoo()
    n = A.shape[0]
    ab = np.zeros((kl + ku + 1, n))
    for i, j, v in zip(A.row, A.col, A.data):
        if not -kl <= i - j <= ku:
            raise ValueError("matrix entries outside declared bandwidth")
        ab[ku + i - j, j] += v
    return ab


def scalar_operator(grid, diff, c, potential, order=4):
    """Sparse diff * d2 + c * d1 + potential(z) for one component."""
    A = diff * d2_matrix(grid, order) + c * d1_matrix(grid, order)
    return A + sp.diags(potential)


def system_operator(grid, D, c, jac_samples, k=0.0, order=4):
    """Sparse discretization of D (dzz - k^2) + c dz + J(z).

    ``jac_samples`` is an (n_z, n, n) array of Jacobian values; the node
    ordering is z-major with the n components contiguous per node.
    """
    n_z = grid.n_z
    n = D.shape[0]
    D2 = d2_matrix(grid, order)
    D1 = d1_matrix(grid, order)
    A = sp.kron(D2, sp.csr_matrix(D)) + c * sp.kron(D1, sp.eye(n))
    if k != 0.0:
        A = A - (k * k) * sp.kron(sp.eye(n_z), sp.csr_matrix(D))
    node = n * np.repeat(np.arange(n_z), n * n)
    rows = node + np.tile(np.repeat(np.arange(n), n), n_z)
    cols = node + np.tile(np.arange(n), n * n_z)
    blocks = sp.coo_matrix((np.asarray(jac_samples, dtype=float).ravel(),
                            (rows, cols)), shape=(n_z * n, n_z * n))
    return (A + blocks).tocsr()
