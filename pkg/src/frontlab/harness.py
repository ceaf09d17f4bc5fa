"""Experiment orchestration: configs, the registry, suites, and bundles.

Each experiment binds the numerical modules to one verification target and
emits a deterministic report bundle (canonical report.json plus CSV
tables).  ``suite`` runs any subset and summarizes pass/fail per check.
"""
import json
import os
import sys
from dataclasses import dataclass, field as dfield

import numpy as np

from . import analysis, hj, linear, simulator, spectral, tracking
from .errors import ConfigError
from .grids import Field2D, Grid1D, Grid2D
from .model import model_from_config
from .profile import adjoint_eigenfunction, coefficients, solve_front
from .simulator import SimConfig, make_perturbation, sponge_mask

__all__ = ["ExperimentSpec", "run_experiment", "suite", "EXPERIMENTS",
           "load_config", "default_config"]


@dataclass(frozen=True)
class ExperimentSpec:
    """A named experiment plus config overrides and the seed to run it at."""

    name: str
    config: dict = dfield(default_factory=dict)
    seed: int = 7


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def default_config(experiment):
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment '{experiment}'; available: "
            f"{sorted(EXPERIMENTS)}")
    return json.loads(json.dumps(EXPERIMENTS[experiment]["defaults"]))


def load_config(path=None, experiment=None, overrides=None):
    """Merge a JSON config file over the experiment defaults."""
    cfg = default_config(experiment) if experiment else {}
    if path:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        version = user.get("version", 1)
        if version != 1:
            raise ConfigError(f"unsupported config version {version}")
        _deep_update(cfg, user)
    if overrides:
        _deep_update(cfg, overrides)
    return cfg


def _deep_update(base, extra):
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            _deep_update(base[k], v)
        else:
            base[k] = v


def _grid1d(cfg):
    g = cfg["grid1d"]
    try:
        return Grid1D(float(g["z_min"]), float(g["z_max"]), int(g["n_z"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid1d entry: {exc!r}") from exc


def _grid2d(cfg, zgrid):
    g = cfg["grid2d"]
    try:
        return Grid2D(float(g["y_length"]), int(g["n_y"]), zgrid)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid2d entry: {exc!r}") from exc


def _pipeline(cfg, tail_tol=1e-8):
    """Model, front, adjoint mode, and coefficients for one config."""
    model = model_from_config(cfg["model"],
                              tolerances=cfg.get("tolerances", {}).get("model"))
    zgrid = _grid1d(cfg)
    prof = solve_front(model, zgrid)
    adj = adjoint_eigenfunction(model, prof,
                                tail_tol=cfg.get("tolerances", {}).get(
                                    "adjoint_tail", tail_tol))
    d_perp, nld = coefficients(model, prof, adj)
    return model, prof, adj, d_perp, nld


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _exp_nagumo_profile(cfg, seed):
    a = cfg["model"]["params"]["a"]
    model = model_from_config(cfg["model"])
    prof = solve_front(model, _grid1d(cfg))
    c_exact = np.sqrt(2.0) * (0.5 - a)

    def reference(z):
        return 1.0 / (1.0 + np.exp(z / np.sqrt(2.0)))

    err, shift = analysis.best_shift_error(prof.grid.z, prof.phi[:, 0],
                                           reference)
    tol = cfg["tolerances"]
    metrics = {"c": prof.c, "c_exact": c_exact, "profile_sup_error": err,
               "realign_shift": shift, "newton_residual": prof.residual}
    criteria = [
        {"name": "speed_error", "value": abs(prof.c - c_exact),
         "threshold": tol["speed"], "op": "<="},
        {"name": "profile_error", "value": err,
         "threshold": tol["profile"], "op": "<="},
    ]
    csv = {"profile.csv": (("z", "phi", "dphi"),
                           np.column_stack([prof.grid.z, prof.phi[:, 0],
                                            prof.dphi[:, 0]]))}
    return metrics, criteria, csv


def _exp_coefficients(cfg, seed):
    tol = cfg["tolerances"]
    metrics, criteria = {}, []
    for entry in cfg["models"]:
        sub = {"model": entry["model"], "grid1d": entry["grid1d"],
               "tolerances": cfg.get("tolerances", {})}
        model, prof, adj, d_perp, nld = _pipeline(sub)
        zg = _grid1d(sub)
        fine = {"model": entry["model"],
                "grid1d": {"z_min": zg.z_min, "z_max": zg.z_max,
                           "n_z": 2 * zg.n_z},
                "tolerances": cfg.get("tolerances", {})}
        _, _, _, _, nld_fine = _pipeline(fine)
        key = entry["label"]
        w = prof.grid.trapz_weights()
        norm_err = abs(float(np.sum(w[:, None] * adj.estar * prof.dphi)) - 1.0)
        metrics[key] = {"d_perp": d_perp, "nld_residual": nld,
                        "nld_residual_fine": nld_fine,
                        "normalization_error": norm_err,
                        "c": prof.c}
        criteria.append({"name": f"{key}:normalization", "value": norm_err,
                         "threshold": tol["normalization"], "op": "<="})
        criteria.append({"name": f"{key}:nld_residual", "value": nld,
                         "threshold": tol["nld"], "op": "<="})
        criteria.append({"name": f"{key}:nld_refinement_gain",
                         "value": nld / max(nld_fine, 1e-300),
                         "threshold": tol["nld_gain"], "op": ">="})
        if entry.get("identity_diffusion"):
            criteria.append({"name": f"{key}:d_perp_identity",
                             "value": abs(d_perp - 1.0),
                             "threshold": tol["d_perp_identity"], "op": "<="})
    return metrics, criteria, {}


def _exp_didentity_dispersion(cfg, seed):
    tol = cfg["tolerances"]
    model, prof, adj, d_perp, _ = _pipeline(cfg)
    ks = np.array(cfg["k_list"])
    lam, d_fit, c4 = spectral.dispersion_curve(model, prof, ks)
    dev = float(np.max(np.abs(lam.real + ks**2)))
    imag = float(np.max(np.abs(lam.imag)))
    metrics = {"d_perp_fit": d_fit, "c4": c4, "max_parabola_deviation": dev,
               "max_imag": imag, "d_perp_quadrature": d_perp}
    criteria = [
        {"name": "d_perp_fit_identity", "value": abs(d_fit - 1.0),
         "threshold": tol["d_fit"], "op": "<="},
        {"name": "parabola_deviation", "value": max(dev, imag),
         "threshold": tol["parabola"], "op": "<="},
    ]
    csv = {"dispersion.csv": (("k", "re_lambda", "im_lambda"),
                              np.column_stack([ks, lam.real, lam.imag]))}
    return metrics, criteria, csv


def _exp_fhn_dispersion(cfg, seed):
    tol = cfg["tolerances"]
    model, prof, adj, d_perp, _ = _pipeline(cfg)
    ks = np.array(cfg["k_list"])
    lam, d_fit, c4 = spectral.dispersion_curve(model, prof, ks)
    rel = abs(d_fit - d_perp) / d_perp
    metrics = {"d_perp_fit": d_fit, "d_perp_quadrature": d_perp,
               "relative_gap": rel, "c4": c4}
    criteria = [{"name": "quadrature_vs_eigensolve", "value": rel,
                 "threshold": tol["rel_gap"], "op": "<="}]
    csv = {"dispersion.csv": (("k", "re_lambda", "im_lambda"),
                              np.column_stack([ks, lam.real, lam.imag]))}
    return metrics, criteria, csv


def _exp_semigroup_remainder(cfg, seed):
    tol = cfg["tolerances"]
    model, prof, adj, d_perp, _ = _pipeline(cfg)
    grid = _grid2d(cfg, prof.grid)
    u0 = make_perturbation("bounded_random", model, prof, grid, 0.01,
                           seed=seed, smooth_width=cfg["smooth_width"])
    amp = cfg["v0_amplitude"] / 0.01
    v0 = Field2D(grid, (u0.values - prof.phi[None, :, :]) * amp)
    times = list(cfg["times"])
    series = linear.remainder_series(model, prof, adj, v0, times,
                                     cfg["dt"], d_perp)
    ts = np.array([t for t, _ in series])
    sup = np.array([s for _, s in series])
    t_sup = ts * sup
    base = t_sup[0]
    ratio = float(np.max(t_sup) / base)
    metrics = {"t_times_sup": dict(zip(map(str, ts), t_sup)),
               "max_over_t5_ratio": ratio}
    criteria = [{"name": "remainder_envelope_ratio", "value": ratio,
                 "threshold": tol["ratio"], "op": "<="}]

    # scalar control: y-independent datum orthogonal to the projection
    ctrl = cfg["control"]
    sub = {"model": ctrl["model"], "grid1d": ctrl["grid1d"],
           "tolerances": cfg.get("tolerances", {})}
    cmodel, cprof, cadj, cdperp, _ = _pipeline(sub)
    h1 = spectral.check_hyp_1d(cmodel, cprof)
    cgrid = Grid2D(ctrl["y_length"], ctrl["n_y"], cprof.grid)
    rng = np.random.default_rng(seed)
    zenv = np.exp(-(cprof.grid.z / ctrl["z_width"]) ** 2)
    col = zenv * np.sin(0.37 * cprof.grid.z + rng.uniform(0, 2 * np.pi))
    v0c_vals = np.broadcast_to(col[None, :, None],
                               (cgrid.n_y, cprof.grid.n_z, 1)).copy()
    v0c_vals = v0c_vals - spectral.project_P0(cadj, cprof, v0c_vals)
    series_c = linear.remainder_series(cmodel, cprof, cadj,
                                       Field2D(cgrid, v0c_vals),
                                       ctrl["times"], ctrl["dt"], cdperp)
    tc = np.array([t for t, _ in series_c])
    sc = np.array([s for _, s in series_c])
    # exponential rate from a log-linear fit
    A = np.column_stack([np.ones_like(tc), tc])
    coef, *_ = np.linalg.lstsq(A, np.log(sc), rcond=None)
    rate = float(coef[1])
    metrics["control_rate"] = rate
    metrics["control_theta1"] = h1.theta1
    criteria.append({"name": "control_exponential_rate", "value": rate,
                     "threshold": -0.5 * h1.theta1, "op": "<="})
    csv = {"remainder.csv": (("t", "norm_S", "t_times_norm_S"),
                             np.column_stack([ts, sup, t_sup]))}
    return metrics, criteria, csv


def _tracked_run(cfg, model, prof, adj, d_perp, e0, seed):
    grid = _grid2d(cfg, prof.grid)
    u0 = make_perturbation("bounded_random", model, prof, grid, e0,
                           seed=seed, smooth_width=cfg["smooth_width"])
    outs = tuple(np.concatenate([np.arange(0.0, 5.0, 1.0),
                                 np.arange(5.0, cfg["t_end"] + 0.1, 2.5)]))
    sim_cfg = SimConfig(grid, dt=cfg["dt"], t_end=cfg["t_end"],
                        output_times=outs)
    run, ts = tracking.coupled_run(model, prof, adj, u0, sim_cfg,
                                   d_perp=d_perp)
    mask = sponge_mask(prof.grid)
    sup_u = float(np.max(np.abs(
        (run.final.values - prof.phi[None, :, :])[:, mask, :])))
    return run, ts, sup_u


def _exp_verify_main(cfg, seed):
    tol = cfg["tolerances"]
    metrics, criteria, csv = {}, [], {}
    for entry in cfg["models"]:
        sub = {"model": entry["model"], "grid1d": entry["grid1d"],
               "grid2d": cfg["grid2d"], "smooth_width": cfg["smooth_width"],
               "dt": cfg["dt"], "t_end": cfg["t_end"],
               "tolerances": cfg.get("tolerances", {})}
        model, prof, adj, d_perp, _ = _pipeline(
            sub, tail_tol=entry.get("adjoint_tail", 1e-8))
        e0 = cfg["E0"]
        run, tstate, supu_full = _tracked_run(sub, model, prof, adj, d_perp,
                                              e0, seed)
        run_h, _, supu_half = _tracked_run(sub, model, prof, adj, d_perp,
                                           0.5 * e0, seed)
        t = np.array(run.times)
        w = (t >= 5.0)
        vr = np.array(run.series["sup_v_ring"])
        env = analysis.envelope_constant(
            t[w], vr[w], e0 * np.log(2.0 + t[w]) / (1.0 + t[w]))
        grad_fit = analysis.fit_decay(t, run.series["sup_grad_sigma"],
                                      "power", (5.0, cfg["t_end"]))
        lap_fit = analysis.fit_decay(t, run.series["sup_lap_sigma"],
                                     "power", (5.0, cfg["t_end"]))
        sig_max = float(np.max(run.series["sup_sigma"]))
        # Lyapunov diagnostics over the whole trajectory
        sup_traj = _sup_u_traj(run, prof)
        sup_traj_half = _sup_u_traj(run_h, prof)
        lin_resp = abs(2.0 * sup_traj_half / sup_traj - 1.0)
        key = entry["label"]
        metrics[key] = {
            "envelope_C": env, "grad_exponent": -grad_fit.exponent,
            "lap_exponent": -lap_fit.exponent, "sigma_max": sig_max,
            "sup_u_minus_front": sup_traj, "sup_u_minus_front_half": sup_traj_half,
            "linear_response_defect": lin_resp, "E0": e0, "d_perp": d_perp}
        criteria.extend([
            {"name": f"{key}:v_ring_envelope", "value": env,
             "threshold": tol["envelope_C"], "op": "<="},
            {"name": f"{key}:grad_sigma_exponent", "value": -grad_fit.exponent,
             "threshold": tol["grad_window"], "op": "in"},
            {"name": f"{key}:lap_sigma_exponent", "value": -lap_fit.exponent,
             "threshold": tol["lap_window"], "op": "in"},
            {"name": f"{key}:sigma_bound", "value": sig_max,
             "threshold": tol["sigma_over_E0"] * e0, "op": "<="},
            {"name": f"{key}:lyapunov", "value": sup_traj,
             "threshold": tol["lyapunov_over_E0"] * e0, "op": "<="},
            {"name": f"{key}:linear_response", "value": lin_resp,
             "threshold": tol["linear_response"], "op": "<="},
        ])
        csv[f"track_{key}.csv"] = (
            ("t", "E0", "sup_v_ring", "sup_sigma", "sup_grad_sigma",
             "sup_lap_sigma", "sup_g", "sup_N"),
            np.column_stack([t, run.series["E0"], vr,
                             run.series["sup_sigma"],
                             run.series["sup_grad_sigma"],
                             run.series["sup_lap_sigma"],
                             run.series["sup_g"], run.series["sup_N"]]))
    return metrics, criteria, csv


def _sup_u_traj(run, prof):
    """Largest distance from the unmodulated front along a tracked run."""
    t = np.array(run.times)
    vr = np.array(run.series["sup_v_ring"])
    ss = np.array(run.series["sup_sigma"])
    dphi_max = float(np.max(np.abs(prof.dphi)))
    # |u - phi| <= |v_ring| + |phi(. - sigma) - phi|; the bound is tight to
    # O(sigma^2) and avoids storing trajectory snapshots
    return float(np.max(vr + ss * dphi_max))


def _exp_verify_hj(cfg, seed):
    tol = cfg["tolerances"]
    metrics, criteria = {}, []
    for entry in cfg["models"]:
        sub = {"model": entry["model"], "grid1d": entry["grid1d"],
               "tolerances": cfg.get("tolerances", {})}
        model, prof, adj, d_perp, _ = _pipeline(
            sub, tail_tol=entry.get("adjoint_tail", 1e-8))
        params = hj.ColeHopfParams(c=prof.c, d_perp=d_perp)
        grid = Grid2D(cfg["y_length"], cfg["n_y"], prof.grid)
        key = entry["label"]
        errs = {}
        for e0 in (cfg["E0"], 0.5 * cfg["E0"]):
            s = e0 / float(np.max(np.abs(prof.dphi)))
            u0 = make_perturbation("translation", model, prof, grid, 0.2,
                                   s=s)
            outs = tuple(np.arange(5.0, cfg["t_end"] + 0.1, 5.0))
            sim_cfg = SimConfig(grid, dt=cfg["dt"], t_end=cfg["t_end"],
                                output_times=outs)
            run, ts = tracking.coupled_run(model, prof, adj, u0, sim_cfg,
                                           d_perp=d_perp,
                                           snapshot_times=outs)
            sig_traj = hj.solve_effective_hj(u0, prof, adj, params, outs)
            errors = []
            for snap, mod in zip(run.snapshots, sig_traj):
                errors.append(analysis.compare_modulated(
                    snap, mod.sigma, prof))
            tarr = np.array(outs)
            bound = tol["C"] * (e0**2 + e0 * np.log(2.0 + tarr) / (1.0 + tarr))
            errs[e0] = {"t": tarr, "err": np.array(errors), "bound": bound}
            criteria.append({
                "name": f"{key}:hj_envelope_E0={e0:g}",
                "value": float(np.max(np.array(errors) / bound)),
                "threshold": 1.0, "op": "<="})
        r_full = errs[cfg["E0"]]["err"][-1]
        r_half = errs[0.5 * cfg["E0"]]["err"][-1]
        quarter = abs(4.0 * r_half / r_full - 1.0)
        metrics[key] = {"final_residual": float(r_full),
                        "final_residual_half": float(r_half),
                        "quartering_defect": float(quarter)}
        criteria.append({"name": f"{key}:residual_quadratic_scaling",
                         "value": float(quarter),
                         "threshold": tol["quartering"], "op": "<="})
    return metrics, criteria, {}


def _exp_oscillate(cfg, seed):
    tol = cfg["tolerances"]
    model, prof, adj, d_perp, _ = _pipeline(cfg)
    params = hj.ColeHopfParams(c=prof.c, d_perp=d_perp)
    grid = _grid2d(cfg, prof.grid)
    delta = cfg["delta"]
    u0, check_times, info = simulator.make_oscillating_data(
        model, prof, adj, grid, delta, d_perp, params.beta,
        w0=cfg["w0"], growth=cfg["growth"], min_level=cfg["min_level"])
    dt = cfg["dt"]
    check_times = [round(t / dt) * dt for t in check_times]
    t_end = check_times[-1]
    sim_cfg = SimConfig(grid, dt=dt, t_end=t_end, output_times=())
    run = simulator.run(model, prof, u0, sim_cfg,
                        snapshot_times=check_times)
    dphi_max = float(np.max(np.abs(prof.dphi)))
    rows, criteria = [], []
    E0 = float(np.max(np.abs(u0.values - prof.phi[None, :, :])))
    criteria.append({"name": "E0_small", "value": E0,
                     "threshold": 2.0 * (1.0 + dphi_max) * delta, "op": "<="})
    mask = sponge_mask(prof.grid)
    for m, (snap, t) in enumerate(zip(run.snapshots, check_times)):
        sig_hat = analysis.interface_estimate(snap, prof, adj)
        val = float(sig_hat[0])
        want_sign = (-1.0) ** m
        rows.append((t, val))
        criteria.append({"name": f"interface_sign_t{m}",
                         "value": val * want_sign,
                         "threshold": tol["level"] * delta, "op": ">="})
        # distance from every translate of the front stays bounded below
        shifts = np.linspace(-3 * delta, 3 * delta, 61)
        dists = []
        for a in shifts:
            moved = simulator.shift_profile(
                grid, prof.phi, np.full(grid.n_y, -a))
            dists.append(float(np.max(np.abs(
                (snap.values - moved)[:, mask, :]))))
        inf_dist = float(np.min(dists))
        criteria.append({"name": f"untranslatable_t{m}", "value": inf_dist,
                         "threshold": tol["inf_shift"] * delta * dphi_max,
                         "op": ">="})
    metrics = {"check_times": list(check_times), "E0": E0,
               "interface_at_origin": [v for _, v in rows],
               "xi_levels": info["levels"]}
    csv = {"oscillation.csv": (("t", "interface_at_origin"), rows)}
    return metrics, criteria, csv


def _exp_localized_decay(cfg, seed):
    tol = cfg["tolerances"]
    model, prof, adj, d_perp, _ = _pipeline(cfg)
    grid = _grid2d(cfg, prof.grid)
    e0 = cfg["E0"]
    mask = sponge_mask(prof.grid)

    def sup_obs(t, u):
        return np.max(np.abs((u.values - prof.phi[None, :, :])[:, mask, :]))

    u0 = make_perturbation("localized_gaussian", model, prof, grid, e0,
                           width=cfg["width"])
    outs = tuple(np.arange(0.0, cfg["t_end"] + 0.1, 5.0))
    sim_cfg = SimConfig(grid, dt=cfg["dt"], t_end=cfg["t_end"],
                        output_times=outs)
    run = simulator.run(model, prof, u0, sim_cfg, observers={"sup": sup_obs})
    sup = np.array(run.series["sup"])
    t_half = next((t for t, s in zip(run.times, sup) if s < 0.5 * e0), None)
    final = float(sup[-1])
    metrics = {"first_halving_time": t_half, "final_sup": final, "E0": e0}
    criteria = [
        {"name": "halves_within_horizon",
         "value": -1.0 if t_half is None else t_half,
         "threshold": [0.0, cfg["t_end"]], "op": "in"},
        {"name": "final_below_quarter", "value": final,
         "threshold": 0.25 * e0, "op": "<="},
    ]
    # nonlocalized control: no decay below its effective-dynamics plateau
    ctrl = make_perturbation("bounded_random", model, prof, grid, e0,
                             seed=seed, smooth_width=cfg["smooth_width"])
    sim_cfg_c = SimConfig(grid, dt=cfg["dt"], t_end=cfg["t_end"],
                          output_times=(cfg["t_end"],))
    run_c = simulator.run(model, prof, ctrl, sim_cfg_c,
                          observers={"sup": sup_obs})
    params = hj.ColeHopfParams(c=prof.c, d_perp=d_perp)
    sig = hj.solve_effective_hj(ctrl, prof, adj, params, [cfg["t_end"]])[0]
    moved = simulator.shift_profile(grid, prof.phi, -sig.sigma)
    plateau = float(np.max(np.abs((moved - prof.phi[None, :, :])[:, mask, :])))
    ctrl_final = float(run_c.series["sup"][-1])
    metrics["control_final"] = ctrl_final
    metrics["control_plateau_prediction"] = plateau
    criteria.append({"name": "control_stays_up", "value": ctrl_final,
                     "threshold": tol["control_fraction"] * plateau,
                     "op": ">="})
    csv = {"decay.csv": (("t", "sup"), np.column_stack([run.times, sup]))}
    return metrics, criteria, csv


def _exp_cole_hopf_xcheck(cfg, seed):
    tol = cfg["tolerances"]
    rng = np.random.default_rng(seed)
    # roundtrip identities
    worst = 0.0
    for beta in (-0.5, 0.0, 2.0):
        sig = rng.uniform(-1.0, 1.0, 257)
        back = hj.inverse_cole_hopf(hj.cole_hopf(sig, beta), beta)
        worst = max(worst, float(np.max(np.abs(back - sig))))
    n_y, L = cfg["n_y"], cfg["y_length"]
    y = L / n_y * np.arange(n_y)
    c, d_perp = cfg["c"], cfg["d_perp"]
    params = hj.ColeHopfParams(c=c, d_perp=d_perp)
    amp = cfg["g_amplitude"]

    def g_provider(t):
        return amp * np.exp(-t) * (np.sin(2 * np.pi * y / L)
                                   + 0.5 * np.cos(4 * np.pi * y / L + 1.0))

    out = hj.solve_forced_hj(g_provider, params, n_y, L, 1.0, cfg["dt"],
                             output_times=[1.0])[0]
    ref = hj.solve_hj_finite_difference(g_provider, c, d_perp, n_y, L, 1.0,
                                        cfg["dt_fd"])
    gap = float(np.max(np.abs(out.sigma - ref)))
    metrics = {"roundtrip": worst, "solver_gap": gap}
    criteria = [
        {"name": "roundtrip_identity", "value": worst,
         "threshold": tol["roundtrip"], "op": "<="},
        {"name": "independent_discretization_gap", "value": gap,
         "threshold": tol["gap"], "op": "<="},
    ]
    return metrics, criteria, {}


def _exp_heat_bounds(cfg, seed):
    tol = cfg["tolerances"]
    n_y, L = cfg["n_y"], cfg["y_length"]
    d_perp = cfg["d_perp"]
    v0 = simulator.plateau_field(n_y, L, seed=seed,
                                 smooth_width=cfg["smooth_width"])
    times = np.geomspace(cfg["t_min"], cfg["t_max"], 40)
    rows, C = linear.heat_bound_probe(d_perp, v0, times, L)
    sup0 = float(np.max(np.abs(v0)))
    consts = (1.0, linear.heat_grad_constant(d_perp),
              linear.heat_lap_constant(d_perp))
    rel = max(max(r[1 + j] / (consts[j] * sup0) for j in range(3))
              for r in rows)
    metrics = {"reported_C": C, "relative_to_gaussian": float(rel),
               "gaussian_constants": list(consts)}
    criteria = [{"name": "heat_bounds_constant", "value": float(rel),
                 "threshold": tol["C"], "op": "<="}]
    csv = {"heat_bounds.csv": (("t", "sup", "sqrt_t_grad", "t_lap"), rows)}
    return metrics, criteria, csv


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_NAGUMO_GRID = {"z_min": -50.0, "z_max": 50.0, "n_z": 2048}
_FHN_GRID = {"z_min": -80.0, "z_max": 80.0, "n_z": 2048}
_NAGUMO_GRID_RUN = {"z_min": -50.0, "z_max": 50.0, "n_z": 512}
_FHN_GRID_RUN = {"z_min": -80.0, "z_max": 80.0, "n_z": 512}

EXPERIMENTS = {
    "nagumo-profile": {
        "run": _exp_nagumo_profile,
        "defaults": {
            "model": {"name": "nagumo", "params": {"a": 0.3}},
            "grid1d": {"z_min": -40.0, "z_max": 40.0, "n_z": 2048},
            "tolerances": {"speed": 1e-6, "profile": 1e-6},
        },
    },
    "coefficients": {
        "run": _exp_coefficients,
        "defaults": {
            "models": [
                {"label": "nagumo", "model": {"name": "nagumo",
                                              "params": {"a": 0.3}},
                 "grid1d": _NAGUMO_GRID, "identity_diffusion": True},
                {"label": "fhn_d05", "model": {"name": "fhn",
                                               "params": {"delta": 0.5}},
                 "grid1d": _FHN_GRID},
                {"label": "fhn_d1", "model": {"name": "fhn",
                                              "params": {"delta": 1.0}},
                 "grid1d": _FHN_GRID, "identity_diffusion": True},
            ],
            "tolerances": {"normalization": 1e-8, "nld": 1e-5,
                           "nld_gain": 3.0, "d_perp_identity": 1e-8},
        },
    },
    "didentity-dispersion": {
        "run": _exp_didentity_dispersion,
        "defaults": {
            "model": {"name": "nagumo", "params": {"a": 0.3}},
            "grid1d": {"z_min": -50.0, "z_max": 50.0, "n_z": 1024},
            "k_list": [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4,
                       0.45, 0.5],
            "tolerances": {"d_fit": 1e-6, "parabola": 1e-6},
        },
    },
    "fhn-dispersion": {
        "run": _exp_fhn_dispersion,
        "defaults": {
            "model": {"name": "fhn", "params": {"delta": 0.5}},
            "grid1d": _FHN_GRID,
            "k_list": [0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.175,
                       0.2, 0.225, 0.25],
            "tolerances": {"rel_gap": 0.02},
        },
    },
    "semigroup-remainder": {
        "run": _exp_semigroup_remainder,
        "defaults": {
            "model": {"name": "fhn", "params": {"delta": 0.5}},
            "grid1d": _FHN_GRID_RUN,
            "grid2d": {"y_length": 400.0, "n_y": 256},
            "v0_amplitude": 1.0,
            "smooth_width": 3.0,
            "dt": 0.01,
            "times": [5.0, 10.0, 20.0, 35.0, 50.0, 75.0, 100.0],
            "control": {
                "model": {"name": "nagumo", "params": {"a": 0.3}},
                "grid1d": _NAGUMO_GRID_RUN,
                "y_length": 80.0, "n_y": 32, "z_width": 10.0,
                "dt": 0.02, "times": [5.0, 10.0, 15.0, 20.0, 25.0, 30.0]},
            "tolerances": {"ratio": 3.0, "adjoint_tail": 1e-6},
        },
    },
    "verify-main": {
        "run": _exp_verify_main,
        "defaults": {
            "models": [
                {"label": "nagumo", "model": {"name": "nagumo",
                                              "params": {"a": 0.3}},
                 "grid1d": _NAGUMO_GRID_RUN},
                {"label": "fhn", "model": {"name": "fhn",
                                           "params": {"delta": 0.5}},
                 "grid1d": _FHN_GRID_RUN, "adjoint_tail": 1e-6},
            ],
            "grid2d": {"y_length": 400.0, "n_y": 256},
            "smooth_width": 3.0,
            "dt": 0.02, "t_end": 100.0, "E0": 0.01,
            "tolerances": {"envelope_C": 20.0,
                           "grad_window": [-0.65, -0.4],
                           "lap_window": [-1.2, -0.8],
                           "sigma_over_E0": 20.0,
                           "lyapunov_over_E0": 10.0,
                           "linear_response": 0.25,
                           "adjoint_tail": 1e-6},
        },
    },
    "verify-hj": {
        "run": _exp_verify_hj,
        "defaults": {
            "models": [
                {"label": "nagumo", "model": {"name": "nagumo",
                                              "params": {"a": 0.3}},
                 "grid1d": _NAGUMO_GRID_RUN},
                {"label": "fhn", "model": {"name": "fhn",
                                           "params": {"delta": 0.5}},
                 "grid1d": _FHN_GRID_RUN, "adjoint_tail": 1e-6},
            ],
            "y_length": 100.0, "n_y": 32,
            "dt": 0.02, "t_end": 100.0, "E0": 0.04,
            "tolerances": {"C": 20.0, "quartering": 0.35,
                           "adjoint_tail": 1e-6},
        },
    },
    "oscillate": {
        "run": _exp_oscillate,
        "defaults": {
            "model": {"name": "nagumo", "params": {"a": 0.3}},
            "grid1d": _NAGUMO_GRID_RUN,
            "grid2d": {"y_length": 400.0, "n_y": 512},
            "delta": 0.05, "w0": 1.2, "growth": 10.0,
            "min_level": 0.5, "dt": 0.1,
            "tolerances": {"level": 0.4, "inf_shift": 0.3,
                           "adjoint_tail": 1e-6},
        },
    },
    "localized-decay": {
        "run": _exp_localized_decay,
        "defaults": {
            "model": {"name": "nagumo", "params": {"a": 0.3}},
            "grid1d": _NAGUMO_GRID_RUN,
            "grid2d": {"y_length": 400.0, "n_y": 256},
            "E0": 0.02, "width": 4.0, "t_end": 200.0, "dt": 0.02,
            "smooth_width": 3.0,
            "tolerances": {"control_fraction": 0.8, "adjoint_tail": 1e-6},
        },
    },
    "cole-hopf-xcheck": {
        "run": _exp_cole_hopf_xcheck,
        "defaults": {
            "n_y": 1024, "y_length": 40.0, "c": 0.28, "d_perp": 1.0,
            "g_amplitude": 0.01, "dt": 0.002, "dt_fd": 0.0002,
            "tolerances": {"roundtrip": 1e-13, "gap": 1e-6},
        },
    },
    "heat-bounds": {
        "run": _exp_heat_bounds,
        "defaults": {
            "n_y": 1024, "y_length": 400.0, "d_perp": 1.1539,
            "smooth_width": 1.5, "t_min": 0.1, "t_max": 100.0,
            "tolerances": {"C": 2.0},
        },
    },
}


# ---------------------------------------------------------------------------
# run + suite
# ---------------------------------------------------------------------------

def run_experiment(name, out_dir=None, config_path=None, seed=None,
                   overrides=None):
    """Execute one registered experiment and write its bundle.

    ``name`` may be an :class:`ExperimentSpec`, whose config acts as the
    override layer.  Returns the report dict; ``report["pass"]`` is the
    exit verdict.
    """
    if isinstance(name, ExperimentSpec):
        overrides = {**name.config, **(overrides or {})}
        seed = seed if seed is not None else name.seed
        name = name.name
    if name not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment '{name}'; available: {sorted(EXPERIMENTS)}")
    cfg = load_config(config_path, experiment=name, overrides=overrides)
    seed = seed if seed is not None else cfg.get("seed", 7)
    metrics, criteria, csv = EXPERIMENTS[name]["run"](cfg, seed)
    report = analysis.make_report(name, {"config": cfg, "seed": seed},
                                  metrics, criteria)
    if out_dir:
        analysis.write_report(report, os.path.join(out_dir, name),
                              csv_tables=csv)
    return report


def suite(names="all", out_dir=None, config_path=None, seed=None,
          stream=None):
    """Run several experiments; returns (all_passed, reports)."""
    stream = stream or sys.stdout
    if names == "all" or names == ["all"]:
        names = list(EXPERIMENTS)
    reports = []
    ok = True
    for name in names:
        report = run_experiment(name, out_dir=out_dir,
                                config_path=config_path, seed=seed)
        reports.append(report)
        ok = ok and report["pass"]
        for c in report["criteria"]:
            status = "PASS" if c["pass"] else "FAIL"
            print(f"[{status}] {name}:{c['name']} value={c['value']:.6g} "
                  f"threshold={c['threshold']}", file=stream)
    print(f"suite: {'PASS' if ok else 'FAIL'} "
          f"({sum(r['pass'] for r in reports)}/{len(reports)} experiments)",
          file=stream)
    return ok, reports
