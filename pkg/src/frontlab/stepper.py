"""Strang-split comoving stepper shared by the linear and nonlinear solvers.

One step of size dt is

    half transverse heat  *  combined z-IMEX step  *  half transverse heat

where the transverse diffusion acts as an exact Fourier multiplier per mode
(in the eigenbasis of D), and the z substep treats D dzz + c dz by
Crank-Nicolson with the reaction advanced by an explicit midpoint
predictor.  Boundary nodes in z are frozen at their initial values, which
the interior stencils see as Dirichlet data; fields that start on a
discrete steady state therefore stay on it to the steady state's own
residual, without splitting drift.
"""
import os

import numpy as np
import scipy.fft as sfft

from . import fdops
from ._kernels import BandedLU
from .errors import BlowUpError


def _fft_workers():
    env = os.environ.get("FRONTLAB_THREADS")
    if env:
        return max(1, int(env))
    return min(2, os.cpu_count() or 1)


_BW = 2  # stencil half-bandwidth of the fourth-order interior operator


class ZOperator:
    """Banded interior operator lam * dzz + c * dz for one component."""

    def __init__(self, grid, lam, c, order=4):
        A = (lam * fdops.d2_matrix(grid, order) + c * fdops.d1_matrix(grid, order)).tolil()
        n_z = grid.n_z
        A_int = A[1:n_z - 1, 1:n_z - 1].tocsr()
        self.bc_cols = np.column_stack([
            np.asarray(A[1:n_z - 1, 0].todense()).ravel(),
            np.asarray(A[1:n_z - 1, n_z - 1].todense()).ravel()])
        self.diags = [A_int.diagonal(o) for o in range(-_BW, _BW + 1)]
        self.n_int = n_z - 2

    def matvec(self, u):
        """Apply to (n_y, n_int) interior data (no boundary contribution)."""
        out = np.zeros_like(u)
        for o, d in zip(range(-_BW, _BW + 1), self.diags):
            if o >= 0:
                out[:, :self.n_int - o] += d * u[:, o:]
            else:
                out[:, -o:] += d * u[:, :self.n_int + o]
        return out

    def cn_matrix(self, dt):
        ab = np.zeros((2 * _BW + 1, self.n_int))
        for o, d in zip(range(-_BW, _BW + 1), self.diags):
            row = _BW - o
            if o >= 0:
                ab[row, o:] = -0.5 * dt * d
            else:
                ab[row, :self.n_int + o] = -0.5 * dt * d
        ab[_BW, :] += 1.0
        return BandedLU(ab, _BW, _BW)


class ComovingStepper:
    """Second-order IMEX-Strang integrator on a periodic-in-y strip.

    Parameters
    ----------
    grid : Grid2D
    D : ndarray
        Diffusion matrix (n, n), symmetric positive definite.
    c : float
        Comoving frame speed.
    reaction : callable
        Maps the full field (n_y, n_z, n) to its pointwise source term.
    dt : float
    order : int
        Stencil order of the z operators (matches the profile solver).
    """

    def __init__(self, grid, D, c, reaction, dt, order=4):
        self.grid = grid
        self.dt = float(dt)
        self.reaction = reaction
        D = np.atleast_2d(np.asarray(D, dtype=float))
        self.n = D.shape[0]
        lam, Q = np.linalg.eigh(D)
        self.diagonal_D = bool(np.max(np.abs(D - np.diag(np.diag(D)))) == 0.0)
        if self.diagonal_D:
            self.lam = np.diag(D).copy()
            self.Q = None
        else:
            self.lam, self.Q = lam, Q
        self.zops = [ZOperator(grid.zgrid, l, c, order) for l in self.lam]
        self.cn = [op.cn_matrix(self.dt) for op in self.zops]
        w = grid.omega()
        self.heat_half = np.exp(-np.outer(w**2, self.lam) * (0.5 * self.dt))
        self.n_int = grid.zgrid.n_z - 2
        self._bc_term = None
        self._u_bc = None

    # -- basis helpers -----------------------------------------------------
    def _to_eig(self, u):
        return u if self.Q is None else u @ self.Q

    def _from_eig(self, u):
        return u if self.Q is None else u @ self.Q.T

    def bind_boundary(self, u0_values):
        """Freeze the two z-boundary node rows at their initial values."""
        self._u_bc = u0_values[:, [0, -1], :].copy()
        bc_e = self._to_eig(self._u_bc)  # (n_y, 2, n)
        self._bc_term = np.stack(
            [bc_e[:, :, q] @ self.zops[q].bc_cols.T for q in range(self.n)],
            axis=-1)  # (n_y, n_int, n)

    # -- substeps ----------------------------------------------------------
    def _heat_half(self, u_int_eig):
        wk = _fft_workers()
        uh = sfft.rfft(u_int_eig, axis=0, workers=wk)
        uh *= self.heat_half[:, None, :]
        return sfft.irfft(uh, n=self.grid.n_y, axis=0, workers=wk)

    def _lin_apply(self, u_int_eig):
        out = np.empty_like(u_int_eig)
        for q in range(self.n):
            out[:, :, q] = self.zops[q].matvec(u_int_eig[:, :, q])
        return out

    def _assemble(self, u_int_eig, u_full):
        u_full[:, 1:-1, :] = self._from_eig(u_int_eig)
        return u_full

    def step_count(self, t_end):
        n = int(round(t_end / self.dt))
        if abs(n * self.dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
            raise ValueError(f"t_end {t_end} is not a multiple of dt {self.dt}")
        return n

    def run(self, u0_values, n_steps, callback=None, t0=0.0,
            check_every=25):
        """Advance ``n_steps`` steps; ``callback(step, values)`` fires after
        each step with the full field (boundary rows included)."""
        if self._bc_term is None:
            self.bind_boundary(u0_values)
        u_full = u0_values.copy()
        u = self._to_eig(u0_values[:, 1:-1, :].copy())
        dt = self.dt
        for s in range(n_steps):
            u = self._heat_half(u)
            # combined z-diffusion/advection + reaction over dt
            Au = self._lin_apply(u) + self._bc_term
            F = self._to_eig(self.reaction(self._assemble(u, u_full))[:, 1:-1, :])
            u_half = u + (0.5 * dt) * (Au + F)
            F_half = self._to_eig(
                self.reaction(self._assemble(u_half, u_full))[:, 1:-1, :])
            rhs = u + (0.5 * dt) * Au + dt * (F_half + 0.5 * self._bc_term)
            for q in range(self.n):
                u[:, :, q] = self.cn[q].solve(rhs[:, :, q].T).T
            u = self._heat_half(u)
            if (s + 1) % check_every == 0 or s + 1 == n_steps:
                if not np.isfinite(float(np.min(u))):
                    raise BlowUpError(
                        f"field blew up near t = {t0 + (s + 1) * dt:.6g}",
                        time=t0 + (s + 1) * dt)
            if callback is not None:
                callback(s + 1, self._assemble(u, u_full))
        return self._assemble(u, u_full)
