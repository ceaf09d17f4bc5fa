"""Traveling-front profiles, the adjoint zero mode, and pairing coefficients.

The profile (phi, c) solves D phi'' + c phi' + f(phi) = 0 with Dirichlet
values at the truncated ends and a phase condition pinning the translation.
The adjoint zero mode e* spans the kernel of the transposed discretization
and is scaled so that its pairing with phi' is one; the transverse diffusion
coefficient and the speed identity residual are trapezoid pairings on the
shared grid.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu, eigs

from . import fdops
from .errors import (DegenerateKernelError, NoConvergenceError,
                     NormalizationError, SingularSystemError,
                     InvalidParameterError)
from .grids import Grid1D

__all__ = ["FrontProfile", "AdjointEigenfunction", "default_guess",
           "solve_front", "adjoint_eigenfunction", "coefficients"]


@dataclass(frozen=True)
class FrontProfile:
    grid: Grid1D
    phi: np.ndarray          # (n_z, n)
    dphi: np.ndarray
    ddphi: np.ndarray
    c: float
    phi_minus: np.ndarray
    phi_plus: np.ndarray
    residual: float
    order: int = 4

    @property
    def n(self):
        return self.phi.shape[1]

    def is_pulse(self):
        return bool(np.max(np.abs(self.phi_minus - self.phi_plus)) < 1e-12)


@dataclass(frozen=True)
class AdjointEigenfunction:
    grid: Grid1D
    estar: np.ndarray        # (n_z, n)
    destar: np.ndarray
    ddestar: np.ndarray
    normalization_error: float
    residual: float
    tail: float

    def weighted(self):
        """Trapezoid weights folded into e*, ready for z pairings."""
        return self.grid.trapz_weights()[:, None] * self.estar


def pair_z(weighted_estar, values):
    """<e*, v>_2 along z.  ``values`` is (..., n_z, n); returns (...)."""
    return np.tensordot(values, weighted_estar, axes=([-2, -1], [0, 1]))


def default_guess(model, grid, width=None, c0=0.0):
    """Sigmoid interpolation between the rest states plus a speed guess."""
    w = width if width is not None else np.sqrt(2.0)
    s = 1.0 / (1.0 + np.exp(np.clip(grid.z / w, -200, 200)))
    phi = model.phi_plus[None, :] + np.outer(s, model.phi_minus - model.phi_plus)
    return phi, c0


def _phase_row(grid, profile_guess, pulse):
    """Weights, component, and target of the translation-fixing equation."""
    z = grid.z
    j = int(np.clip(np.searchsorted(z, 0.0) - 1, 0, grid.n_z - 2))
    if pulse:
        # pin the extremum of the first component at the node nearest 0
        j0 = int(np.argmin(np.abs(z)))
        return ("derivative", j0)
    w1 = (z[j + 1] - 0.0) / (z[j + 1] - z[j])
    return ("value", j, w1)


def solve_front(model, grid, guess=None, tol=1e-10, max_iter=50, order=4,
                tail_tol=1e-8):
    """Newton solve of the traveling-wave boundary value problem.

    Unknowns are the profile samples and the speed; damped steps with a
    halving line search.  Returns a :class:`FrontProfile` whose stored
    residual is the final sup norm of the discrete equation.
    """
    n, n_z, h = model.n, grid.n_z, grid.h
    if guess is None:
        phi, c = default_guess(model, grid)
    else:
        phi, c = guess
        phi = np.array(phi, dtype=float).reshape(n_z, n)
        c = float(c)
    phi = np.array(phi, dtype=float)

    D1 = fdops.d1_matrix(grid, order)
    D2 = fdops.d2_matrix(grid, order)
    Dm = model.D
    pulse = bool(np.max(np.abs(model.phi_minus - model.phi_plus)) < 1e-12)
    phase = _phase_row(grid, phi, pulse)
    target = 0.5 * (model.phi_minus[0] + model.phi_plus[0])

    interior = np.arange(1, n_z - 1)
    N = n_z * n

    def residual_vec(phi, c):
        r = (D2 @ phi) @ Dm + c * (D1 @ phi) + model.rate(phi)
        F = np.zeros(N + 1)
        F[:N] = r.ravel()
        F[:n] = phi[0] - model.phi_minus
        F[N - n:N] = phi[-1] - model.phi_plus
        if phase[0] == "value":
            _, j, w1 = phase
            F[N] = w1 * phi[j, 0] + (1 - w1) * phi[j + 1, 0] - target
        else:
            _, j0 = phase
            F[N] = (D1 @ phi)[j0, 0]
        return F

    F = residual_vec(phi, c)
    res = float(np.max(np.abs(F)))
    for it in range(max_iter):
        if res <= tol:
            break
        A = fdops.system_operator(grid, Dm, c, model.jacobian_samples(phi),
                                  0.0, order).tolil()
        # replace boundary node rows by Dirichlet identities
        for comp in range(n):
            A.rows[comp] = [comp]
            A.data[comp] = [1.0]
            A.rows[N - n + comp] = [N - n + comp]
            A.data[N - n + comp] = [1.0]
        dFdc = (D1 @ phi).ravel()
        dFdc[:n] = 0.0
        dFdc[N - n:] = 0.0
        J = sp.hstack([A.tocsr(), sp.csr_matrix(dFdc[:, None])], format="lil")
        prow = np.zeros(N + 1)
        if phase[0] == "value":
            _, j, w1 = phase
            prow[j * n] = w1
            prow[(j + 1) * n] = 1 - w1
        else:
            _, j0 = phase
            row = fdops.d1_matrix(grid, order)[j0].toarray().ravel()
            prow[::n][np.nonzero(row)[0]] = row[np.nonzero(row)[0]]
        J = sp.vstack([J, sp.csr_matrix(prow[None, :])], format="csc")
        try:
            step = splu(J).solve(-F)
        except RuntimeError as exc:
            raise SingularSystemError(f"front Newton system singular: {exc}")
        lam = 1.0
        while True:
            phi_new = phi + lam * step[:N].reshape(n_z, n)
            c_new = c + lam * step[N]
            F_new = residual_vec(phi_new, c_new)
            res_new = float(np.max(np.abs(F_new)))
            if res_new < res or lam < 1.0 / 64.0:
                break
            lam *= 0.5
        if not np.isfinite(res_new) or (res_new >= res and res > tol):
            raise NoConvergenceError(
                f"front Newton stalled at residual {res:.3e}", last_residual=res)
        phi, c, F, res = phi_new, c_new, F_new, res_new
    else:
        if res > tol:
            raise NoConvergenceError(
                f"front Newton did not reach tol {tol:.1e} in {max_iter} "
                f"iterations (residual {res:.3e})", last_residual=res)

    tail = max(np.max(np.abs(phi[0] - model.phi_minus)),
               np.max(np.abs(phi[-1] - model.phi_plus)))
    if tail > tail_tol:
        raise NoConvergenceError(f"boundary mismatch {tail:.2e}", last_residual=res)
    dphi = fdops.apply_d1(phi, h, order)
    ddphi = fdops.apply_d2(phi, h, order)
    return FrontProfile(grid=grid, phi=phi, dphi=dphi, ddphi=ddphi, c=float(c),
                        phi_minus=model.phi_minus.copy(),
                        phi_plus=model.phi_plus.copy(),
                        residual=res, order=order)


def operator_matrix(model, profile, k=0.0):
    """Sparse discretization of D(dzz - k^2) + c dz + f'(phi)."""
    return fdops.system_operator(profile.grid, model.D, profile.c,
                                 model.jacobian_samples(profile.phi),
                                 k, profile.order)


def adjoint_eigenfunction(model, profile, degeneracy_tol=1e-8,
                          pairing_tol=1e-12, tail_tol=1e-8):
    """Kernel element of the transposed operator, scaled to unit pairing.

    Shift-invert Arnoldi around zero with a deterministic start vector;
    the second-smallest eigenvalue must stay away from zero for the kernel
    to count as simple.
    """
    grid = profile.grid
    A = operator_matrix(model, profile)
    AT = A.T.tocsc()
    v0 = np.ones(AT.shape[0])
    vals, vecs = eigs(AT, k=2, sigma=0.0, which="LM", v0=v0)
    idx = np.argsort(np.abs(vals))
    if abs(vals[idx[1]]) < degeneracy_tol:
        raise DegenerateKernelError(
            f"two eigenvalues within {degeneracy_tol:.1e} of zero: "
            f"{vals[idx[0]]:.2e}, {vals[idx[1]]:.2e}")
    e = np.real(vecs[:, idx[0]]).reshape(grid.n_z, model.n)

    w = grid.trapz_weights()
    s = float(np.sum(w[:, None] * e * profile.dphi))
    if abs(s) < pairing_tol * np.max(np.abs(e)) * max(np.max(np.abs(profile.dphi)), 1e-300):
        raise NormalizationError("<e*, phi'> vanishes; cannot normalize")
    e = e / s
    resid = float(np.max(np.abs((AT @ e.ravel()))))
    tail = float(max(np.max(np.abs(e[0])), np.max(np.abs(e[-1]))))
    if tail > tail_tol:
        raise NormalizationError(
            f"adjoint mode not localized: boundary value {tail:.2e}")
    norm_err = abs(float(np.sum(w[:, None] * e * profile.dphi)) - 1.0)
    return AdjointEigenfunction(
        grid=grid, estar=e,
        destar=fdops.apply_d1(e, grid.h, profile.order),
        ddestar=fdops.apply_d2(e, grid.h, profile.order),
        normalization_error=norm_err, residual=resid, tail=tail)


def coefficients(model, profile, adjoint):
    """Transverse diffusion coefficient and the speed-identity residual.

    Returns ``(d_perp, nld_residual)`` where d_perp pairs e* with D phi'
    and the residual measures |c/2 + <e*, D phi''>|.
    """
    if adjoint.grid != profile.grid:
        raise InvalidParameterError("profile and adjoint must share one grid")
    w = profile.grid.trapz_weights()[:, None]
    d_perp = float(np.sum(w * adjoint.estar * (profile.dphi @ model.D)))
    nld = abs(0.5 * profile.c
              + float(np.sum(w * adjoint.estar * (profile.ddphi @ model.D))))
    return d_perp, nld
