"""Transverse Fourier-symbol spectra, hypothesis verdicts, dispersion curve.

The family L_k = D (dzz - k^2) + c dz + f'(phi) controls spectral stability
of the planar front.  This module assembles the discretized operators,
renders verdicts on the one-dimensional and transverse stability hypotheses
with explicit margins, and tracks the critical eigenvalue branch through
k = 0 whose curvature is the transverse diffusion coefficient.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import eigs

from .errors import ContinuationAmbiguityError, DimensionMismatchError
from .profile import operator_matrix, pair_z

__all__ = ["DispersionReport", "Hyp1dReport", "assemble_Lk", "check_hyp_1d",
           "check_hyp_transverse", "dispersion_curve", "project_P0"]

DENSE_LIMIT = 2600  # dense eigensolves above this size are not worth it


def _n_workers():
    env = os.environ.get("FRONTLAB_THREADS")
    if env:
        return max(1, int(env))
    return min(2, os.cpu_count() or 1)


@dataclass(frozen=True)
class Hyp1dReport:
    ok: bool
    theta1: float
    zero_eigenvalue: complex
    zero_alignment: float     # cosine similarity of the kernel vector vs phi'
    n_filtered: int           # boundary-artifact modes excluded from theta1
    message: str = ""


@dataclass(frozen=True)
class DispersionReport:
    k_values: np.ndarray
    max_real: np.ndarray          # per-k rightmost real part
    lambda_c: Optional[np.ndarray]
    d_perp_fit: Optional[float]
    theta1: float
    theta2: float
    theta3: float
    k0: float
    hyp2_ok: bool
    hyp3_ok: bool
    spectra: Optional[list] = field(default=None, repr=False)


def assemble_Lk(model, profile, k):
    """Sparse matrix of L_k with Dirichlet-zero closure at the ends."""
    return operator_matrix(model, profile, k=k)


def _rightmost(model, profile, k, dense, sigma_hint=None):
    """Largest real part of the spectrum of L_k (and the spectrum if dense)."""
    A = assemble_Lk(model, profile, k)
    if dense:
        vals = sla.eigvals(A.toarray(), check_finite=False)
        return float(np.max(vals.real)), vals
    # sparse path: probe near the previous rightmost value and near zero
    probes = [0.0]
    if sigma_hint is not None:
        probes.append(sigma_hint + 0.05)
    best = -np.inf
    for s in probes:
        try:
            vals = eigs(A, k=8, sigma=s, which="LM", v0=np.ones(A.shape[0]),
                        return_eigenvectors=False)
        except Exception:
            continue
        best = max(best, float(np.max(vals.real)))
    return best, None


def check_hyp_1d(model, profile, adjoint=None, zero_tol=1e-8,
                 tail_fraction=0.1, tail_mass=0.01):
    """One-dimensional spectral stability verdict with margin theta1.

    Dense eigensolve of L_0.  True iff exactly one eigenvalue sits within
    ``zero_tol`` of the origin, its eigenvector aligns with phi', and the
    rest of the (non-boundary-artifact) spectrum lies left of -theta1 < 0.
    Truncation produces spurious modes living near the domain ends; modes
    with more than ``tail_mass`` of their mass in the outer ``tail_fraction``
    of the domain are excluded from the margin.
    """
    A = assemble_Lk(model, profile, 0.0).toarray()
    vals, vecs = sla.eig(A, check_finite=False)
    n_z, n = profile.grid.n_z, model.n

    near_zero = np.flatnonzero(np.abs(vals) <= zero_tol)
    if len(near_zero) == 0:
        return Hyp1dReport(False, 0.0, 0j, 0.0, 0,
                           "no eigenvalue near zero")
    if len(near_zero) > 1:
        return Hyp1dReport(False, 0.0, complex(vals[near_zero[0]]), 0.0, 0,
                           f"{len(near_zero)} eigenvalues within {zero_tol:g} of zero")
    iz = near_zero[0]
    v = vecs[:, iz].reshape(n_z, n)
    dphi = profile.dphi.ravel()
    align = abs(np.vdot(vecs[:, iz], dphi)) / (
        np.linalg.norm(vecs[:, iz]) * np.linalg.norm(dphi))
    if align < 0.999:
        return Hyp1dReport(False, 0.0, complex(vals[iz]), float(align), 0,
                           "kernel vector is not the translational mode")

    m = int(np.ceil(tail_fraction * n_z))
    outer = np.zeros(n_z, dtype=bool)
    outer[:m] = True
    outer[-m:] = True
    mass = np.abs(vecs.reshape(n_z, n, -1)) ** 2
    frac = mass[outer].sum(axis=(0, 1)) / mass.sum(axis=(0, 1))
    keep = (frac <= tail_mass)
    keep[iz] = False
    n_filtered = int(np.sum(~keep) - 1)
    rest = vals[keep]
    if len(rest) == 0:
        return Hyp1dReport(False, 0.0, complex(vals[iz]), float(align),
                           n_filtered, "filter removed the entire spectrum")
    theta1 = -float(np.max(rest.real))
    ok = theta1 > 0
    return Hyp1dReport(bool(ok), theta1, complex(vals[iz]), float(align),
                       n_filtered, "" if ok else "spectrum reaches the right half plane")


def _fit_margins(ks, mr, theta1):
    """Largest admissible theta2, theta3 and smallest k0 the data support."""
    ks = np.asarray(ks)
    mr = np.asarray(mr)
    pos = ks > 0
    # quadratic-envelope rate at each sampled frequency
    rate = np.full_like(mr, np.inf)
    rate[pos] = -mr[pos] / ks[pos] ** 2
    # k0: smallest k beyond which the parabola stops dominating the data,
    # i.e. where the pointwise rate falls below half its small-k plateau
    plateau = np.nanmedian(rate[pos & (ks <= max(ks.max() * 0.2, ks[pos].min() * 4))])
    k0 = ks.max()
    for i in np.flatnonzero(pos):
        if rate[i] < 0.5 * plateau:
            k0 = ks[i]
            break
    low = pos & (ks <= k0)
    high = ks >= k0
    theta2 = float(np.min(rate[low])) if np.any(low) else 0.0
    theta3 = -float(np.max(mr[high])) if np.any(high) else 0.0
    return theta2, theta3, float(k0)


def check_hyp_transverse(model, profile, k_grid=None, adjoint=None,
                         keep_spectra=False, zero_tol=1e-8):
    """Transverse spectral stability verdict over a frequency grid.

    Computes the rightmost spectrum of L_k per k (dense below
    ``DENSE_LIMIT`` unknowns, shift-invert tracking above), then fits the
    best margins theta2 (low frequency, rate per k^2), theta3 (beyond k0)
    consistent with the data.
    """
    if k_grid is None:
        k_grid = np.linspace(0.0, 5.0, 51)
    k_grid = np.asarray(k_grid, dtype=float)
    if k_grid[0] != 0.0 or k_grid[-1] < 5.0:
        raise DimensionMismatchError("k grid must start at 0 and reach 5")
    size = profile.grid.n_z * model.n
    dense = size <= DENSE_LIMIT

    hyp1 = check_hyp_1d(model, profile, zero_tol=zero_tol) if dense else None

    max_real = np.empty_like(k_grid)
    spectra = [] if (keep_spectra and dense) else None
    if dense:
        def work(k):
            return _rightmost(model, profile, k, True)
        with ThreadPoolExecutor(max_workers=_n_workers()) as ex:
            results = list(ex.map(work, k_grid))
        for i, (mr, vals) in enumerate(results):
            max_real[i] = mr
            if spectra is not None:
                spectra.append(vals)
    else:
        hint = 0.0
        for i, k in enumerate(k_grid):
            mr, _ = _rightmost(model, profile, k, False, sigma_hint=hint)
            max_real[i] = mr
            hint = mr

    lam_c, d_fit = None, None
    small = k_grid[k_grid <= 0.5]
    if len(small) >= 3:
        try:
            lam_small, d_fit, _ = dispersion_curve(model, profile, small)
            lam_c = lam_small
        except ContinuationAmbiguityError:
            pass

    theta1 = hyp1.theta1 if (hyp1 and hyp1.ok) else 0.0
    theta2, theta3, k0 = _fit_margins(k_grid, max_real, theta1)
    hyp2_ok = bool(hyp1.ok) if hyp1 is not None else bool(abs(max_real[0]) <= zero_tol)
    hyp3_ok = bool(theta2 > 0 and theta3 > 0)
    return DispersionReport(k_values=k_grid, max_real=max_real,
                            lambda_c=lam_c, d_perp_fit=d_fit,
                            theta1=theta1, theta2=theta2, theta3=theta3,
                            k0=k0, hyp2_ok=hyp2_ok, hyp3_ok=hyp3_ok,
                            spectra=spectra)


def dispersion_curve(model, profile, k_list, max_step=0.01, n_track=6,
                     collision_tol=1e-10):
    """Continue the translational eigenvalue branch to small k.

    Nearest-eigenvalue continuation with linear prediction and step-size
    backtracking; fits lambda(k) = -d k^2 + c4 k^4 by even least squares.
    Returns (lambda_c values at ``k_list``, d_perp_fit, c4).
    """
    k_list = np.atleast_1d(np.asarray(k_list, dtype=float))
    if np.any(np.abs(k_list) > 0.5 + 1e-12):
        raise DimensionMismatchError("dispersion_curve expects |k| <= 0.5")
    # branch is even in k: track on |k| values, sorted
    ks_abs = np.unique(np.abs(k_list))
    targets = {}

    A0 = assemble_Lk(model, profile, 0.0)
    v0 = np.ones(A0.shape[0])
    lam0, w0 = eigs(A0, k=1, sigma=0.0, which="LM", v0=v0)
    lam0 = lam0[0]
    w_prev = w0[:, 0]
    targets[0.0] = lam0

    def eig_near(k, sigma):
        A = assemble_Lk(model, profile, k)
        return eigs(A, k=n_track, sigma=complex(sigma), which="LM", v0=v0)

    lam_prev, k_prev = lam0, 0.0
    slope = 0.0
    for k in ks_abs[ks_abs > 0]:
        # walk from k_prev to k in controlled steps, following the
        # eigenvector to keep hold of the branch through near-crossings
        while k_prev < k - 1e-14:
            step = min(max_step, k - k_prev)
            while True:
                k_try = k_prev + step
                pred = lam_prev + slope * (k_try**2 - k_prev**2)
                vals, vecs = eig_near(k_try, pred)
                overlap = np.abs(w_prev.conj() @ vecs) / (
                    np.linalg.norm(w_prev) * np.linalg.norm(vecs, axis=0))
                order = np.argsort(-overlap)
                best = order[0]
                ambiguous = (len(vals) > 1
                             and abs(vals[order[0]] - vals[order[1]]) < collision_tol
                             and overlap[order[1]] > 0.5)
                if ambiguous or overlap[best] < 0.8:
                    if step <= max_step / 64:
                        raise ContinuationAmbiguityError(
                            f"branches indistinguishable near k={k_try:.4f}; "
                            "reduce the continuation step")
                    step *= 0.5
                    continue
                lam_new = vals[best]
                w_prev = vecs[:, best]
                break
            if k_try**2 > k_prev**2 + 1e-14:
                slope = (lam_new - lam_prev) / (k_try**2 - k_prev**2)
            lam_prev, k_prev = lam_new, k_try
        targets[k] = lam_prev

    lam_out = np.array([targets[abs(k)] for k in k_list])
    kk = np.array(sorted(targets))
    ll = np.array([targets[k].real for k in kk])
    X = np.column_stack([kk**2, kk**4])
    coef, *_ = np.linalg.lstsq(X, ll, rcond=None)
    d_fit = -float(coef[0])
    c4 = float(coef[1])
    return lam_out, d_fit, c4


def project_P0(adjoint, profile, v):
    """Spectral projection onto the translational mode, per y column.

    ``v`` is (n_z, n) or (n_y, n_z, n); returns the same shape.
    """
    v = np.asarray(v, dtype=float)
    if v.shape[-2] != profile.grid.n_z or v.shape[-1] != profile.phi.shape[1]:
        raise DimensionMismatchError(
            f"value shape {v.shape} does not match the profile grid")
    amp = pair_z(adjoint.weighted(), v)
    return np.multiply.outer(amp, profile.dphi)
