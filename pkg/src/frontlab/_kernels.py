"""Hot numeric kernels: banded solves, spline shifts, fused reaction rates.

Every kernel has a pure-numpy implementation and, when numba is importable
and ``FRONTLAB_NUMBA`` is not set to ``0``, an ``@njit`` twin compiled on
first use.  ``benchmarks/bench_kernels.py`` compares the two paths.
"""
import os

import numpy as np
import scipy.linalg as _sla

_WANT_NUMBA = os.environ.get("FRONTLAB_NUMBA", "1") != "0"

try:  # pragma: no cover - exercised through both paths in the benchmark
    if _WANT_NUMBA:
        from numba import njit
    else:
        njit = None
except ImportError:  # pragma: no cover
    njit = None

NUMBA_ENABLED = njit is not None


def use_numba():
    """True when the compiled kernel path is active."""
    return NUMBA_ENABLED


# ---------------------------------------------------------------------------
# banded LU without pivoting (diagonally dominant systems only)
# ---------------------------------------------------------------------------
# Storage: ab[kl + ku + 1, n] LAPACK-style, ab[ku + i - j, j] = A[i, j].

def _banded_lu_factor_np(ab, kl, ku):
    n = ab.shape[1]
    lu = ab.copy()
    for j in range(n):
        piv = lu[ku, j]
        for i in range(1, min(kl, n - 1 - j) + 1):
            m = lu[ku + i, j] / piv
            lu[ku + i, j] = m
            for k in range(1, min(ku, n - 1 - j) + 1):
                lu[ku + i - k, j + k] -= m * lu[ku - k, j + k]
    return lu


def _banded_lu_solve_np(lu, kl, ku, b):
    n = lu.shape[1]
    x = np.array(b, dtype=float, copy=True)
    if x.ndim == 1:
        x = x[:, None]
        squeeze = True
    else:
        squeeze = False
    for j in range(n - 1):
        for i in range(1, min(kl, n - 1 - j) + 1):
            x[j + i] -= lu[ku + i, j] * x[j]
    for j in range(n - 1, -1, -1):
        for k in range(1, min(ku, n - 1 - j) + 1):
            x[j] -= lu[ku - k, j + k] * x[j + k]
        x[j] /= lu[ku, j]
    return x[:, 0] if squeeze else x


if NUMBA_ENABLED:

    @njit(cache=True)
    def _banded_lu_factor_nb(ab, kl, ku):  # pragma: no cover - jitted
        n = ab.shape[1]
        lu = ab.copy()
        for j in range(n):
            piv = lu[ku, j]
            imax = min(kl, n - 1 - j)
            for i in range(1, imax + 1):
                m = lu[ku + i, j] / piv
                lu[ku + i, j] = m
                kmax = min(ku, n - 1 - j)
                for k in range(1, kmax + 1):
                    lu[ku + i - k, j + k] -= m * lu[ku - k, j + k]
        return lu

    @njit(cache=True)
    def _banded_lu_solve_nb(lu, kl, ku, b):  # pragma: no cover - jitted
        n = lu.shape[1]
        nrhs = b.shape[1]
        x = b.copy()
        for j in range(n - 1):
            imax = min(kl, n - 1 - j)
            for i in range(1, imax + 1):
                m = lu[ku + i, j]
                for r in range(nrhs):
                    x[j + i, r] -= m * x[j, r]
        for j in range(n - 1, -1, -1):
            kmax = min(ku, n - 1 - j)
            for k in range(1, kmax + 1):
                m = lu[ku - k, j + k]
                for r in range(nrhs):
                    x[j, r] -= m * x[j + k, r]
            piv = lu[ku, j]
            for r in range(nrhs):
                x[j, r] /= piv
        return x


class BandedLU:
    """Prefactored no-pivot LU of a banded matrix, reusable across solves.

    The matrix must be strictly diagonally dominant (true for all the
    Crank-Nicolson and spline systems assembled here).
    """

    def __init__(self, ab, kl, ku):
        ab = np.ascontiguousarray(ab, dtype=float)
        self.kl, self.ku = kl, ku
        self.n = ab.shape[1]
        if NUMBA_ENABLED:
            self.lu = _banded_lu_factor_nb(ab, kl, ku)
        else:
            self.lu = _banded_lu_factor_np(ab, kl, ku)

    def solve(self, b):
        """Solve A x = b; ``b`` is (n,) or (n, nrhs)."""
        if NUMBA_ENABLED:
            b2 = np.ascontiguousarray(b, dtype=float)
            if b2.ndim == 1:
                return _banded_lu_solve_nb(self.lu, self.kl, self.ku, b2[:, None])[:, 0]
            return _banded_lu_solve_nb(self.lu, self.kl, self.ku, b2)
        return _banded_lu_solve_np(self.lu, self.kl, self.ku, b)


def solve_banded_once(ab, kl, ku, b):
    """One-shot banded solve (LAPACK), for callers that do not refactor."""
    return _sla.solve_banded((kl, ku), ab, b, check_finite=False)


# ---------------------------------------------------------------------------
# natural cubic spline with constant-per-column shift
# ---------------------------------------------------------------------------

def spline_moment_system(n_z, h):
    """Banded matrix of the natural-spline second-derivative system."""
    ab = np.zeros((3, n_z))
    ab[1, :] = 2.0 * h / 3.0
    ab[0, 1:] = h / 6.0
    ab[2, :-1] = h / 6.0
    # natural ends: M[0] = M[-1] = 0
    ab[1, 0] = 1.0
    ab[0, 1] = 0.0
    ab[1, -1] = 1.0
    ab[2, -2] = 0.0
    return ab


def spline_moments(lu, u, h):
    """Second derivatives of the natural cubic splines of each row of ``u``.

    ``u`` has shape (n_y, n_z); columns of the transposed system are solved
    in one prefactored pass.
    """
    n_y, n_z = u.shape
    rhs = np.zeros((n_z, n_y))
    rhs[1:-1] = ((u[:, 2:] - 2.0 * u[:, 1:-1] + u[:, :-2]) / h).T
    return lu.solve(rhs).T


def _shift_eval_np(u, M, h, offsets):
    n_y, n_z = u.shape
    j = np.floor(offsets).astype(np.int64)
    t = (offsets - j)[:, None]
    idx = np.arange(n_z)[None, :] + j[:, None]
    i0 = np.clip(idx, 0, n_z - 1)
    i1 = np.clip(idx + 1, 0, n_z - 1)
    rows = np.arange(n_y)[:, None]
    u0 = u[rows, i0]
    u1 = u[rows, i1]
    m0 = M[rows, i0]
    m1 = M[rows, i1]
    s = 1.0 - t
    out = s * u0 + t * u1 + (h * h / 6.0) * ((s**3 - s) * m0 + (t**3 - t) * m1)
    # clamp outside the table: spline formula above already degenerates to
    # the end value when both gather indices clip to the same node
    return out


if NUMBA_ENABLED:

    @njit(cache=True)
    def _shift_eval_nb(u, M, h, offsets):  # pragma: no cover - jitted
        n_y, n_z = u.shape
        out = np.empty_like(u)
        h2 = h * h / 6.0
        for y in range(n_y):
            o = offsets[y]
            j = int(np.floor(o))
            t = o - j
            s = 1.0 - t
            ca = (s * s * s - s) * h2
            cb = (t * t * t - t) * h2
            for i in range(n_z):
                k = i + j
                if k < 0:
                    k0 = 0
                elif k > n_z - 1:
                    k0 = n_z - 1
                else:
                    k0 = k
                k1 = k + 1
                if k1 < 0:
                    k1 = 0
                elif k1 > n_z - 1:
                    k1 = n_z - 1
                out[y, i] = (s * u[y, k0] + t * u[y, k1]
                             + ca * M[y, k0] + cb * M[y, k1])
        return out


def shift_columns(u, lu, h, shifts):
    """Evaluate each row's cubic spline at z + shift(row).

    ``u``: (n_y, n_z) samples on a uniform grid of spacing ``h``;
    ``shifts``: (n_y,) physical shifts; ``lu``: prefactored spline system.
    Outside the table the end values are held (flat tails).
    """
    M = spline_moments(lu, u, h)
    offsets = np.asarray(shifts, dtype=float) / h
    if NUMBA_ENABLED:
        return _shift_eval_nb(np.ascontiguousarray(u), np.ascontiguousarray(M),
                              float(h), np.ascontiguousarray(offsets))
    return _shift_eval_np(u, M, h, offsets)


# ---------------------------------------------------------------------------
# fused reaction rates for the built-in models
# ---------------------------------------------------------------------------

def _nagumo_rate_np(u, a, out):
    np.multiply(u, 1.0 - u, out=out)
    out *= u - a
    return out


def _fhn_rate_np(U, a, eps, gamma, out):
    u = U[..., 0]
    w = U[..., 1]
    out[..., 0] = u * (1.0 - u) * (u - a) - w
    out[..., 1] = eps * (u - gamma * w)
    return out


if NUMBA_ENABLED:

    @njit(cache=True)
    def _nagumo_rate_nb(u, a, out):  # pragma: no cover - jitted
        flat_u = u.ravel()
        flat_o = out.ravel()
        for i in range(flat_u.size):
            x = flat_u[i]
            flat_o[i] = x * (1.0 - x) * (x - a)
        return out

    @njit(cache=True)
    def _fhn_rate_nb(U, a, eps, gamma, out):  # pragma: no cover - jitted
        V = U.reshape(-1, 2)
        O = out.reshape(-1, 2)
        for i in range(V.shape[0]):
            x = V[i, 0]
            w = V[i, 1]
            O[i, 0] = x * (1.0 - x) * (x - a) - w
            O[i, 1] = eps * (x - gamma * w)
        return out


def nagumo_rate(u, a, out=None):
    if out is None:
        out = np.empty_like(u)
    if NUMBA_ENABLED and u.flags.c_contiguous and out.flags.c_contiguous:
        return _nagumo_rate_nb(u, float(a), out)
    return _nagumo_rate_np(u, a, out)


def fhn_rate(U, a, eps, gamma, out=None):
    if out is None:
        out = np.empty_like(U)
    if NUMBA_ENABLED and U.flags.c_contiguous and out.flags.c_contiguous:
        return _fhn_rate_nb(U, float(a), float(eps), float(gamma), out)
    return _fhn_rate_np(U, a, eps, gamma, out)
