"""Command-line interface.

Grammar::

    frontlab <profile|spectrum|dispersion|linear-decomp|hj|simulate|track|
              verify-main|verify-hj|oscillate|localized-decay|suite>
             [--config PATH] [--out DIR] [--seed N]

The verification subcommands run registered experiments and exit nonzero
if any acceptance check fails.  The pipeline subcommands expose individual
modules for ad-hoc runs driven by a JSON config.
"""
import argparse
import json
import os
import sys

import numpy as np

from . import analysis, harness, hj, linear, simulator, spectral, tracking
from .errors import ConfigError, FrontlabError
from .grids import Grid2D
from .model import model_from_config
from .profile import adjoint_eigenfunction, coefficients, solve_front
from .simulator import SimConfig, make_perturbation

_PIPELINE_DEFAULTS = {
    "model": {"name": "nagumo", "params": {"a": 0.3}},
    "grid1d": {"z_min": -50.0, "z_max": 50.0, "n_z": 2048},
    "grid2d": {"y_length": 400.0, "n_y": 256},
    "sim": {"dt": 0.02, "t_end": 20.0, "output_times": []},
    "perturbation": {"kind": "bounded_random", "amplitude": 0.01,
                     "smooth_width": 3.0},
    "seed": 7,
}


def _load(args):
    cfg = json.loads(json.dumps(_PIPELINE_DEFAULTS))
    if args.config:
        cfg = harness.load_config(args.config, overrides=None) or cfg
        merged = json.loads(json.dumps(_PIPELINE_DEFAULTS))
        harness._deep_update(merged, cfg)
        cfg = merged
    if args.seed is not None:
        cfg["seed"] = args.seed
    return cfg


def _front(cfg, tail_tol=1e-6):
    model = model_from_config(cfg["model"])
    g = cfg["grid1d"]
    from .grids import Grid1D
    zgrid = Grid1D(float(g["z_min"]), float(g["z_max"]), int(g["n_z"]))
    prof = solve_front(model, zgrid)
    adj = adjoint_eigenfunction(model, prof, tail_tol=tail_tol)
    return model, prof, adj


def _cmd_profile(args):
    cfg = _load(args)
    model, prof, adj = _front(cfg)
    d_perp, nld = coefficients(model, prof, adj)
    out = {
        "model": cfg["model"],
        "grid": {"z_min": prof.grid.z_min, "z_max": prof.grid.z_max,
                 "n_z": prof.grid.n_z},
        "c": prof.c,
        "d_perp": d_perp,
        "nld_residual": nld,
        "residual": prof.residual,
        "adjoint_residual": adj.residual,
        "normalization_error": adj.normalization_error,
        "phi": prof.phi.ravel().tolist(),
        "dphi": prof.dphi.ravel().tolist(),
        "estar": adj.estar.ravel().tolist(),
    }
    dest = args.out or "profile.json"
    if os.path.isdir(dest) or dest.endswith(os.sep):
        os.makedirs(dest, exist_ok=True)
        dest = os.path.join(dest, "profile.json")
    with open(dest, "w") as fh:
        fh.write(analysis.canonical_json(out))
        fh.write("\n")
    print(f"c = {prof.c:.12g}, d_perp = {d_perp:.12g}, "
          f"nld_residual = {nld:.3e} -> {dest}")
    return 0


def _cmd_spectrum(args):
    cfg = _load(args)
    model, prof, adj = _front(cfg)
    k_grid = np.linspace(0.0, args.kmax, args.nk)
    rep = spectral.check_hyp_transverse(model, prof, k_grid)
    h1 = spectral.check_hyp_1d(model, prof) if prof.grid.n_z * model.n <= spectral.DENSE_LIMIT else None
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    lam_c = rep.lambda_c if rep.lambda_c is not None else [complex(np.nan)] * 0
    with open(os.path.join(out_dir, "dispersion.csv"), "w") as fh:
        fh.write("k,max_re_lambda,re_lambda_c,im_lambda_c\n")
        small = {round(float(k), 12): l for k, l in
                 zip(rep.k_values[rep.k_values <= 0.5], lam_c)}
        for k, mr in zip(rep.k_values, rep.max_real):
            lc = small.get(round(float(k), 12))
            lc_re = "" if lc is None else format(lc.real, ".17g")
            lc_im = "" if lc is None else format(lc.imag, ".17g")
            fh.write(f"{k:.17g},{mr:.17g},{lc_re},{lc_im}\n")
    payload = {
        "hyp2_ok": rep.hyp2_ok, "hyp3_ok": rep.hyp3_ok,
        "theta1": h1.theta1 if h1 else rep.theta1,
        "theta2": rep.theta2, "theta3": rep.theta3, "k0": rep.k0,
        "d_perp_fit": rep.d_perp_fit,
    }
    with open(os.path.join(out_dir, "dispersion.json"), "w") as fh:
        fh.write(analysis.canonical_json(payload))
        fh.write("\n")
    print(f"hyp2={rep.hyp2_ok} hyp3={rep.hyp3_ok} theta2={rep.theta2:.4g} "
          f"theta3={rep.theta3:.4g} k0={rep.k0:.3g}")
    return 0 if (rep.hyp2_ok and rep.hyp3_ok) else 1


def _cmd_dispersion(args):
    cfg = _load(args)
    model, prof, adj = _front(cfg)
    d_perp, _ = coefficients(model, prof, adj)
    ks = np.linspace(0.0, args.kmax, args.nk)
    lam, d_fit, c4 = spectral.dispersion_curve(model, prof, ks)
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "dispersion_curve.csv"), "w") as fh:
        fh.write("k,re_lambda_c,im_lambda_c\n")
        for k, l in zip(ks, lam):
            fh.write(f"{k:.17g},{l.real:.17g},{l.imag:.17g}\n")
    print(f"d_perp_fit = {d_fit:.8g} (quadrature {d_perp:.8g}), c4 = {c4:.4g}")
    return 0


def _cmd_linear_decomp(args):
    cfg = _load(args)
    model, prof, adj = _front(cfg)
    d_perp, _ = coefficients(model, prof, adj)
    grid = Grid2D(cfg["grid2d"]["y_length"], cfg["grid2d"]["n_y"], prof.grid)
    pert = cfg["perturbation"]
    u0 = make_perturbation(pert["kind"], model, prof, grid,
                           pert["amplitude"], seed=cfg["seed"],
                           smooth_width=pert.get("smooth_width", 3.0))
    from .grids import Field2D
    v0 = Field2D(grid, u0.values - prof.phi[None, :, :])
    times = cfg["sim"].get("output_times") or [5.0, 10.0, 20.0, 50.0]
    series = linear.remainder_series(model, prof, adj, v0, times,
                                     cfg["sim"]["dt"], d_perp)
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "remainder.csv"), "w") as fh:
        fh.write("t,norm_S,t_times_norm_S\n")
        for t, s in series:
            fh.write(f"{t:.17g},{s:.17g},{t * s:.17g}\n")
    for t, s in series:
        print(f"t={t:g} |S(t)v0|={s:.6e}")
    return 0


def _cmd_hj(args):
    cfg = _load(args)
    model, prof, adj = _front(cfg)
    d_perp, _ = coefficients(model, prof, adj)
    params = hj.ColeHopfParams(c=prof.c, d_perp=d_perp)
    n_y = cfg["grid2d"]["n_y"]
    L = cfg["grid2d"]["y_length"]
    amp = cfg["perturbation"]["amplitude"]
    y = L / n_y * np.arange(n_y)

    def g_provider(t):
        return amp * np.exp(-0.5 * t) * np.sin(2 * np.pi * y / L)

    t_end = cfg["sim"]["t_end"]
    dt = cfg["sim"]["dt"]
    times = cfg["sim"].get("output_times") or list(
        np.arange(0.0, t_end + dt / 2, max(t_end / 20, dt)))
    traj = hj.solve_forced_hj(g_provider, params, n_y, L, t_end, dt,
                              output_times=times)
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "sigma.csv"), "w") as fh:
        fh.write("t,sup_sigma,sup_grad_sigma,sup_lap_sigma\n")
        for mod in traj:
            s, g, l = mod.sup_norms()
            fh.write(f"{mod.time:.17g},{s:.17g},{g:.17g},{l:.17g}\n")
    print(f"forced HJ run to t={t_end:g}: sup sigma "
          f"{traj[-1].sup_norms()[0]:.6e}")
    return 0


def _cmd_simulate(args):
    cfg = _load(args)
    model, prof, adj = _front(cfg)
    grid = Grid2D(cfg["grid2d"]["y_length"], cfg["grid2d"]["n_y"], prof.grid)
    pert = cfg["perturbation"]
    u0 = make_perturbation(pert["kind"], model, prof, grid,
                           pert["amplitude"], seed=cfg["seed"],
                           smooth_width=pert.get("smooth_width", 3.0),
                           **({"s": pert["s"]} if "s" in pert else {}))
    sim = cfg["sim"]
    out_times = tuple(sim.get("output_times") or
                      np.arange(0.0, sim["t_end"] + sim["dt"] / 2,
                                max(sim["t_end"] / 10, sim["dt"])))
    mask = simulator.sponge_mask(prof.grid)

    def sup_obs(t, u):
        return np.max(np.abs((u.values - prof.phi[None, :, :])[:, mask, :]))

    scfg = SimConfig(grid, dt=sim["dt"], t_end=sim["t_end"],
                     output_times=out_times)
    run = simulator.run(model, prof, u0, scfg, observers={"sup_pert": sup_obs},
                        snapshot_times=(sim["t_end"],))
    out_dir = args.out or "run"
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "diagnostics.csv"), "w") as fh:
        fh.write("t,sup_pert\n")
        for t, s in zip(run.times, run.series["sup_pert"]):
            fh.write(f"{t:.17g},{s:.17g}\n")
    final = run.snapshots[-1]
    raw = final.values.astype("<f8")
    raw.tofile(os.path.join(out_dir, "state.bin"))
    sidecar = {
        "shape": list(final.values.shape),
        "dtype": "<f8",
        "order": "C",
        "time": final.time,
        "grid": {"y_length": grid.y_length, "n_y": grid.n_y,
                 "z_min": grid.zgrid.z_min, "z_max": grid.zgrid.z_max,
                 "n_z": grid.zgrid.n_z},
    }
    with open(os.path.join(out_dir, "state.json"), "w") as fh:
        fh.write(analysis.canonical_json(sidecar))
        fh.write("\n")
    print(f"simulated to t={sim['t_end']:g}; final sup perturbation "
          f"{run.series['sup_pert'][-1]:.6e} -> {out_dir}/")
    return 0


def _cmd_track(args):
    cfg = _load(args)
    model, prof, adj = _front(cfg)
    d_perp, _ = coefficients(model, prof, adj)
    grid = Grid2D(cfg["grid2d"]["y_length"], cfg["grid2d"]["n_y"], prof.grid)
    pert = cfg["perturbation"]
    u0 = make_perturbation(pert["kind"], model, prof, grid,
                           pert["amplitude"], seed=cfg["seed"],
                           smooth_width=pert.get("smooth_width", 3.0))
    sim = cfg["sim"]
    out_times = tuple(sim.get("output_times") or
                      np.arange(0.0, sim["t_end"] + sim["dt"] / 2,
                                max(sim["t_end"] / 20, sim["dt"])))
    scfg = SimConfig(grid, dt=sim["dt"], t_end=sim["t_end"],
                     output_times=out_times)
    run, ts = tracking.coupled_run(model, prof, adj, u0, scfg, d_perp=d_perp)
    out_dir = args.out or "track"
    os.makedirs(out_dir, exist_ok=True)
    cols = ("E0", "sup_v_ring", "sup_sigma", "sup_grad_sigma",
            "sup_lap_sigma", "sup_g", "sup_N")
    with open(os.path.join(out_dir, "diagnostics.csv"), "w") as fh:
        fh.write("t," + ",".join(cols) + "\n")
        for i, t in enumerate(run.times):
            fh.write(f"{t:.17g}," + ",".join(
                format(run.series[c][i], ".17g") for c in cols) + "\n")
    print(f"tracked run to t={sim['t_end']:g}; final sup v_ring "
          f"{run.series['sup_v_ring'][-1]:.6e} -> {out_dir}/")
    return 0


def _experiment_command(name):
    def cmd(args):
        report = harness.run_experiment(name, out_dir=args.out,
                                        config_path=args.config,
                                        seed=args.seed)
        for c in report["criteria"]:
            status = "PASS" if c["pass"] else "FAIL"
            print(f"[{status}] {c['name']}: value={c['value']:.6g} "
                  f"threshold={c['threshold']}")
        return 0 if report["pass"] else 1
    return cmd


def _cmd_suite(args):
    names = args.names or ["all"]
    ok, _ = harness.suite(names, out_dir=args.out,
                          config_path=args.config, seed=args.seed)
    return 0 if ok else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="frontlab",
        description="Bistable planar fronts: profiles, spectra, interface "
                    "dynamics, and theorem-level verification experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, extra=None):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        if extra:
            extra(p)
        p.set_defaults(fn=fn)
        return p

    add("profile", _cmd_profile)
    add("spectrum", _cmd_spectrum,
        lambda p: (p.add_argument("--kmax", type=float, default=5.0),
                   p.add_argument("--nk", type=int, default=51)))
    add("dispersion", _cmd_dispersion,
        lambda p: (p.add_argument("--kmax", type=float, default=0.25),
                   p.add_argument("--nk", type=int, default=11)))
    add("linear-decomp", _cmd_linear_decomp)
    add("hj", _cmd_hj)
    add("simulate", _cmd_simulate)
    add("track", _cmd_track)
    for exp in ("verify-main", "verify-hj", "oscillate", "localized-decay"):
        add(exp, _experiment_command(exp))
    add("suite", _cmd_suite,
        lambda p: p.add_argument("names", nargs="*", default=None))

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FrontlabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
