"""Linearized 2D evolution and the semigroup decomposition experiment.

The evolution of a perturbation v under D Lap v + c dz v + f'(phi) v splits
into a principal part, the transverse heat flow of the interface pairing
tensored with phi', plus a remainder whose sup norm should fall off like
1/t.  This module evolves v, builds the principal part exactly per Fourier
mode, and tabulates the remainder and the classical heat-derivative bounds.
"""
import warnings

import numpy as np

from .errors import HorizonExceededWarning
from .grids import Field2D
from .hj import heat_multiplier_step
from .profile import pair_z
from .stepper import ComovingStepper

__all__ = ["evolve_linear", "principal_part", "remainder_series",
           "heat_bound_probe", "linearized_reaction",
           "heat_grad_constant", "heat_lap_constant"]


def linearized_reaction(model, profile):
    """Pointwise multiplication by f'(phi(z)), vectorized over the field."""
    J = model.jacobian_samples(profile.phi)  # (n_z, n, n)
    n = model.n
    if n == 1:
        j = np.ascontiguousarray(J[:, 0, 0])

        def apply(v):
            return v * j[None, :, None]
    else:
        cols = [[np.ascontiguousarray(J[:, i, k]) for k in range(n)]
                for i in range(n)]

        def apply(v):
            out = np.empty_like(v)
            for i in range(n):
                acc = cols[i][0][None, :] * v[:, :, 0]
                for k in range(1, n):
                    acc += cols[i][k][None, :] * v[:, :, k]
                out[:, :, i] = acc
            return out
    return apply


def make_linear_stepper(model, profile, grid, dt, order=None):
    return ComovingStepper(grid, model.D, profile.c,
                           linearized_reaction(model, profile), dt,
                           order=order or profile.order)


def evolve_linear(model, profile, v0, t_end, dt, output_times=None):
    """Trajectory of the linearized equation, sampled at ``output_times``.

    ``v0`` must vanish (to tolerance) at the z ends; those rows are frozen.
    Returns a list of :class:`Field2D` copies.
    """
    stepper = make_linear_stepper(model, profile, v0.grid, dt)
    n_steps = stepper.step_count(t_end)
    if output_times is None:
        output_times = [t_end]
    out_steps = {}
    for t in output_times:
        s = int(round(t / dt))
        if abs(s * dt - t) > 1e-9 * max(1.0, t_end):
            raise ValueError(f"output time {t} is not on the dt grid")
        out_steps.setdefault(s, float(t))
    outputs = []
    if 0 in out_steps:
        outputs.append(Field2D(v0.grid, v0.values.copy(), 0.0))

    def cb(s, values):
        if s in out_steps:
            outputs.append(Field2D(v0.grid, values.copy(), out_steps[s]))

    stepper.run(v0.values, n_steps, callback=cb)
    return outputs


def principal_part(profile, adjoint, v0, t, d_perp):
    """Heat-flowed interface pairing tensored with the translational mode."""
    amp = pair_z(adjoint.weighted(), v0.values)      # (n_y,)
    amp_t = heat_multiplier_step(amp, t, d_perp, v0.grid.y_length)
    return Field2D(v0.grid, np.multiply.outer(amp_t, profile.dphi), float(t))


def remainder_series(model, profile, adjoint, v0, times, dt, d_perp):
    """Sup norms of the semigroup remainder at the requested times.

    Returns a list of (t, sup) pairs.  Times beyond the finite-size
    horizon trigger a :class:`HorizonExceededWarning` but are still
    computed.
    """
    times = sorted(float(t) for t in times)
    horizon = v0.grid.horizon(d_perp)
    if times and times[-1] > horizon:
        warnings.warn(
            f"requested times reach {times[-1]:g}, beyond the horizon "
            f"{horizon:g}; periodic wrap will contaminate decay rates",
            HorizonExceededWarning)
    traj = evolve_linear(model, profile, v0, times[-1], dt, output_times=times)
    series = []
    for field in traj:
        pp = principal_part(profile, adjoint, v0, field.time, d_perp)
        series.append((field.time,
                       float(np.max(np.abs(field.values - pp.values)))))
    return series


def heat_grad_constant(d_perp):
    """L1 norm of the Gaussian kernel gradient times sqrt(t)."""
    return 1.0 / np.sqrt(np.pi * d_perp)


def heat_lap_constant(d_perp):
    """L1 norm of the Gaussian kernel Laplacian times t."""
    return np.sqrt(2.0 / np.pi) * np.exp(-0.5) / d_perp


def heat_bound_probe(d_perp, v0, times, y_length):
    """Tabulate sup norms of the heat flow and its derivatives.

    Returns ``(rows, C)`` where each row is (t, |u|, sqrt(t) |grad u|,
    t |lap u|) and ``C`` is the smallest constant with every column
    bounded by C * |v0|_inf.
    """
    v0 = np.asarray(v0, dtype=float)
    n_y = v0.shape[0]
    w = 2.0 * np.pi * np.fft.rfftfreq(n_y, d=y_length / n_y)
    vh0 = np.fft.rfft(v0)
    sup0 = float(np.max(np.abs(v0)))
    rows = []
    for t in times:
        m = np.exp(-d_perp * w**2 * t)
        vh = vh0 * m
        u = np.fft.irfft(vh, n=n_y)
        gu = np.fft.irfft(1j * w * vh, n=n_y)
        lu = np.fft.irfft(-(w**2) * vh, n=n_y)
        rows.append((float(t), float(np.max(np.abs(u))),
                     float(np.sqrt(t) * np.max(np.abs(gu))),
                     float(t * np.max(np.abs(lu)))))
    C = max(max(r[1], r[2], r[3]) for r in rows) / sup0
    return rows, float(C)
