"""Nonlinear tracking: modulation, forcing, and the coupled front run.

The modulation sigma is not fitted from data; it is generated by the forced
interface equation whose forcing g is assembled from unit-interval
heat-smoothed averages of the paired nonlinearity.  Causality is strict:
g on [k + 1/4, k + 3/4] uses only integrals completed by time k, so the
whole system (u, sigma, g) advances in lockstep without inner iterations.
"""
from dataclasses import dataclass, field as dfield

import numpy as np

from . import fdops
from .errors import CausalityError, InvalidParameterError, TransformDomainError
from .grids import Field2D
from .hj import (ColeHopfParams, ModulationField,
                 _force_substep as hj_force_substep,
                 heat_multiplier_step, spectral_grad)
from .linear import linearized_reaction
from .profile import coefficients, pair_z
from .simulator import ColumnShifter, SimulationRun, sponge_mask
from .stepper import ComovingStepper

__all__ = ["TrackingState", "bump_rho", "inverse_modulated",
           "forward_modulated", "nonlinearity_N", "forcing_g", "coupled_run"]


# ---------------------------------------------------------------------------
# temporal cutoff
# ---------------------------------------------------------------------------

def _bump_normalization():
    tau = np.linspace(-1.0, 1.0, 20001)[1:-1]
    vals = np.exp(-1.0 / (1.0 - tau**2))
    # integral over t of rho = (1/4) * integral over tau of the bump
    return 1.0 / (0.25 * np.trapezoid(vals, tau))


_BUMP_C = _bump_normalization()


def bump_rho(t):
    """Smooth cutoff supported in [1/4, 3/4] with unit integral."""
    t = np.asarray(t, dtype=float)
    tau = 4.0 * (t - 0.5)
    out = np.zeros_like(t)
    inside = np.abs(tau) < 1.0
    out[inside] = _BUMP_C * np.exp(-1.0 / (1.0 - tau[inside] ** 2))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# modulated perturbations
# ---------------------------------------------------------------------------

def inverse_modulated(u, sigma, profile, shifter=None):
    """v(y, z) = u(y, z + sigma(y)) - phi(z) in the comoving frame."""
    shifter = shifter or ColumnShifter(u.grid.zgrid)
    shifted = shifter.shift_field(u.values, np.asarray(sigma, dtype=float))
    return Field2D(u.grid, shifted - profile.phi[None, :, :], u.time)


def forward_modulated(u, sigma, profile, shifter=None):
    """v_ring(y, z) = u(y, z) - phi(z - sigma(y))."""
    shifter = shifter or ColumnShifter(u.grid.zgrid)
    moved = shifter.shift_profile(profile.phi, -np.asarray(sigma, dtype=float),
                                  n_y=u.grid.n_y)
    return Field2D(u.grid, u.values - moved, u.time)


class _Paired:
    """Per-column pairings of v and its z derivatives against e*."""

    def __init__(self, model, profile, adjoint, d_perp):
        self.model = model
        self.profile = profile
        self.w_estar = adjoint.weighted()
        self.d_perp = d_perp
        self.f_phi = model.rate(profile.phi)
        self.jac_apply = linearized_reaction(model, profile)
        self.order = profile.order
        self.h = profile.grid.h

    def taylor_term(self, v_values):
        """f(phi + v) - f(phi) - f'(phi) v on the full field."""
        return (self.model.rate(self.profile.phi[None, :, :] + v_values)
                - self.f_phi[None, :, :] - self.jac_apply(v_values))

    def paired_N(self, v_values, mod, g, y_length):
        """<e*, N(v, sigma, g)>_2 as a transverse field."""
        D = self.model.D
        v_z = fdops.apply_d1(v_values, self.h, self.order, axis=1)
        v_zz = fdops.apply_d2(v_values, self.h, self.order, axis=1)
        q_taylor = pair_z(self.w_estar, self.taylor_term(v_values))
        p_vz = pair_z(self.w_estar, v_z)
        p_Dvz = pair_z(self.w_estar, v_z @ D)
        p_Dvzz = pair_z(self.w_estar, v_zz @ D)
        return (q_taylor
                + mod.lap_sigma * (self.d_perp * p_vz - p_Dvz)
                + mod.grad_sigma**2 * (p_Dvzz + 0.5 * self.profile.c * p_vz)
                - 2.0 * mod.grad_sigma * spectral_grad(p_Dvz, y_length)
                - g * p_vz)


def nonlinearity_N(v, sigma_mod, g, model, profile, d_perp):
    """All terms of the perturbation nonlinearity as a full field.

    ``v`` is a Field2D, ``sigma_mod`` a ModulationField carrying the sigma
    derivatives, ``g`` the transverse forcing at the same time.
    """
    vv = v.values
    D = model.D
    taylor = (model.rate(profile.phi[None, :, :] + vv)
              - model.rate(profile.phi)[None, :, :]
              - linearized_reaction(model, profile)(vv))
    v_z = fdops.apply_d1(vv, profile.grid.h, profile.order, axis=1)
    v_zz = fdops.apply_d2(vv, profile.grid.h, profile.order, axis=1)
    grad_y_Dvz = _spectral_grad_field(v_z @ D, v.grid.y_length)
    g = np.asarray(g, dtype=float)
    out = taylor
    out += sigma_mod.lap_sigma[:, None, None] * (d_perp * v_z - v_z @ D)
    out += (sigma_mod.grad_sigma**2)[:, None, None] * (
        v_zz @ D + 0.5 * profile.c * v_z)
    out -= 2.0 * sigma_mod.grad_sigma[:, None, None] * grad_y_Dvz
    out -= g[:, None, None] * v_z
    return Field2D(v.grid, out, v.time)


def _spectral_grad_field(values, y_length):
    n_y = values.shape[0]
    w = 2.0 * np.pi * np.fft.rfftfreq(n_y, d=y_length / n_y)
    vh = np.fft.rfft(values, axis=0)
    shape = [1] * values.ndim
    shape[0] = len(w)
    return np.fft.irfft(1j * w.reshape(shape) * vh, n=n_y, axis=0)


# ---------------------------------------------------------------------------
# forcing
# ---------------------------------------------------------------------------

def forcing_g(t, p0, interval_integrals, d_perp, y_length):
    """Evaluate the tracking forcing at time ``t``.

    ``p0`` is the initial interface pairing <e*, u0 - phi>; the list holds
    the completed unit-interval integrals I_k (index k-1).  Only one cutoff
    window can be active at a time, so at most two heat multipliers run.
    """
    t = float(t)
    g = np.zeros_like(p0)
    r0 = bump_rho(t)
    if r0 != 0.0:
        g = g + r0 * heat_multiplier_step(p0, t, d_perp, y_length)
    k = int(round(t - 0.5))
    if k >= 1 and bump_rho(t - k) != 0.0:
        if k > len(interval_integrals):
            raise CausalityError(
                f"forcing at t={t:g} needs interval integral I_{k}, but only "
                f"{len(interval_integrals)} are complete")
        g = g + bump_rho(t - k) * heat_multiplier_step(
            interval_integrals[k - 1], t - k, d_perp, y_length)
    return g


@dataclass
class TrackingState:
    """Outcome of a coupled run: modulation, forcing history, perturbations."""

    sigma: ModulationField
    g_history: list
    p0: np.ndarray
    v: Field2D
    v_ring: Field2D
    diagnostics: dict
    d_perp: float
    beta: float
    E0: float
    rho_samples: np.ndarray = dfield(default=None, repr=False)
    snapshots: list = dfield(default_factory=list, repr=False)


def coupled_run(model, profile, adjoint, u0, cfg, d_perp=None,
                output_times=None, snapshot_times=(), e0_max=0.05):
    """Co-evolve the front simulation with its tracked modulation.

    Returns ``(SimulationRun, TrackingState)``.  ``cfg.dt`` must divide 1
    so interval integrals close exactly at integer times.
    """
    grid = u0.grid
    y_length = grid.y_length
    if d_perp is None:
        d_perp, _ = coefficients(model, profile, adjoint)
    params = ColeHopfParams(c=profile.c, d_perp=d_perp)
    beta = params.beta
    dt = cfg.dt
    steps_per_unit = int(round(1.0 / dt))
    if abs(steps_per_unit * dt - 1.0) > 1e-12:
        raise InvalidParameterError("dt must divide 1 for interval integrals")
    mask = sponge_mask(grid.zgrid)
    E0 = float(np.max(np.abs(u0.values - profile.phi[None, :, :])))
    if E0 > e0_max:
        raise InvalidParameterError(
            f"initial distance {E0:.3g} exceeds the tracking gate {e0_max}")

    output_times = list(output_times if output_times is not None
                        else cfg.output_times)
    out_steps = {int(round(t / dt)): float(t) for t in output_times}
    snap_steps = {int(round(t / dt)): float(t) for t in snapshot_times}

    shifter = ColumnShifter(grid.zgrid)
    paired = _Paired(model, profile, adjoint, d_perp)
    stepper = ComovingStepper(grid, model.D, profile.c, model.rate, dt,
                              order=profile.order)
    n_steps = stepper.step_count(cfg.t_end)

    p0 = pair_z(adjoint.weighted(), u0.values - profile.phi[None, :, :])
    I_list = []
    acc = np.zeros(grid.n_y)
    xi = np.zeros(grid.n_y)
    mod = ModulationField.from_xi(xi, params, y_length, 0.0)
    g_now = forcing_g(0.0, p0, I_list, d_perp, y_length)
    v_vals = u0.values - profile.phi[None, :, :]
    pN_prev = paired.paired_N(v_vals, mod, g_now, y_length)

    times = []
    series = {k: [] for k in ("E0", "sup_v", "sup_v_ring", "sup_sigma",
                              "sup_grad_sigma", "sup_lap_sigma", "sup_g",
                              "sup_N")}
    snapshots = []
    track_snaps = []
    state = {"mod": mod, "v": v_vals, "g": g_now}

    def record(step_idx, u_values, t):
        mod = state["mod"]
        v = Field2D(grid, state["v"], t)
        moved = shifter.shift_profile(profile.phi, -mod.sigma, n_y=grid.n_y)
        v_ring_vals = u_values - moved
        s_sig, s_grad, s_lap = mod.sup_norms()
        N_field = nonlinearity_N(v, mod, state["g"], model, profile, d_perp)
        times.append(t)
        series["E0"].append(E0)
        series["sup_v"].append(float(np.max(np.abs(state["v"][:, mask, :]))))
        series["sup_v_ring"].append(float(np.max(np.abs(v_ring_vals[:, mask, :]))))
        series["sup_sigma"].append(s_sig)
        series["sup_grad_sigma"].append(s_grad)
        series["sup_lap_sigma"].append(s_lap)
        series["sup_g"].append(float(np.max(np.abs(state["g"]))))
        series["sup_N"].append(float(np.max(np.abs(N_field.values[:, mask, :]))))
        return v_ring_vals

    if 0 in out_steps:
        record(0, u0.values, 0.0)

    def callback(s, u_values):
        nonlocal xi, acc, pN_prev
        t_new = s * dt
        # advance the Cole-Hopf variable with midpoint forcing
        g_mid = forcing_g(t_new - 0.5 * dt, p0, I_list, d_perp, y_length)
        xi_h = heat_multiplier_step(xi, 0.5 * dt, d_perp, y_length)
        xi_h = hj_force_substep(xi_h, g_mid, beta, dt, t=t_new - 0.5 * dt)
        xi = heat_multiplier_step(xi_h, 0.5 * dt, d_perp, y_length)
        if beta != 0.0 and np.min(1.0 + beta * xi) <= 0.0:
            err = TransformDomainError(
                f"tracked modulation left the Cole-Hopf domain at t={t_new:g}")
            err.diagnostics = {"times": list(times),
                               "series": {k: list(v) for k, v in series.items()}}
            raise err
        mod = ModulationField.from_xi(xi, params, y_length, t_new)
        # new perturbation, pairing, forcing
        shifted = shifter.shift_field(u_values, mod.sigma)
        v_vals = shifted - profile.phi[None, :, :]
        g_new = forcing_g(t_new, p0, I_list, d_perp, y_length)
        pN_new = paired.paired_N(v_vals, mod, g_new, y_length)
        # interval-integral accumulator, trapezoid in value, heat-propagated
        acc = (heat_multiplier_step(acc, dt, d_perp, y_length)
               + dt * heat_multiplier_step(0.5 * (pN_prev + pN_new),
                                           0.5 * dt, d_perp, y_length))
        pN_prev = pN_new
        if s % steps_per_unit == 0:
            I_list.append(acc.copy())
            acc = np.zeros_like(acc)
        state["mod"], state["v"], state["g"] = mod, v_vals, g_new
        if s in out_steps:
            record(s, u_values, out_steps[s])
        if s in snap_steps:
            t_snap = snap_steps[s]
            snapshots.append(Field2D(grid, u_values.copy(), t_snap))
            track_snaps.append({"t": t_snap, "mod": mod,
                                "v": v_vals.copy(), "g": g_new.copy()})

    final_values = stepper.run(u0.values, n_steps, callback=callback)
    final = Field2D(grid, final_values.copy(), cfg.t_end)
    run = SimulationRun(times=times, series=series, final=final,
                        snapshots=snapshots)
    mod = state["mod"]
    v_final = Field2D(grid, state["v"], cfg.t_end)
    v_ring_final = forward_modulated(final, mod.sigma, profile, shifter)
    tstate = TrackingState(sigma=mod, g_history=I_list, p0=p0, v=v_final,
                           v_ring=v_ring_final, diagnostics=series,
                           d_perp=d_perp, beta=beta, E0=E0,
                           rho_samples=bump_rho(np.linspace(0, 1, 101)),
                           snapshots=track_snaps)
    return run, tstate
