"""Compare the numba kernels against their pure-numpy fallbacks.

Run with the compiled path (default) and with ``FRONTLAB_NUMBA=0`` to time
the fallback; this script reports both side by side by re-importing the
kernel module with the flag flipped in a subprocess.

    python benchmarks/bench_kernels.py
"""
import json
import os
import subprocess
import sys
import time

import numpy as np

_CASES = ("banded_solve", "spline_shift", "reaction_nagumo", "reaction_fhn",
          "full_step")


def _time(fn, repeat=15):
    fn()  # warm up / compile
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def run_cases():
    import frontlab as fl
    from frontlab import _kernels, fdops
    from frontlab.grids import Grid2D
    from frontlab.simulator import SimConfig, make_perturbation, run

    results = {}
    n_z, n_y = 512, 512
    grid1 = fl.Grid1D(-80.0, 80.0, n_z)

    A = (0.5 * fdops.d2_matrix(grid1) + 0.39 * fdops.d1_matrix(grid1))
    ab = fdops.sparse_to_banded(A.tolil()[1:-1, 1:-1].tocsr(), 2, 2)
    M = -0.01 * ab
    M[2] += 1.0
    lu = _kernels.BandedLU(M, 2, 2)
    B = np.random.default_rng(1).standard_normal((n_z - 2, n_y))
    results["banded_solve"] = _time(lambda: lu.solve(B))

    slu = _kernels.BandedLU(_kernels.spline_moment_system(n_z, grid1.h), 1, 1)
    U = np.ascontiguousarray(
        np.random.default_rng(2).standard_normal((n_y, n_z)))
    sh = 0.05 * np.sin(np.linspace(0, 6, n_y))
    results["spline_shift"] = _time(
        lambda: _kernels.shift_columns(U, slu, grid1.h, sh))

    F = np.random.default_rng(3).random((n_y, n_z))
    out1 = np.empty_like(F)
    results["reaction_nagumo"] = _time(
        lambda: _kernels.nagumo_rate(F, 0.3, out1))

    G = np.ascontiguousarray(np.random.default_rng(4).random((n_y, n_z, 2)))
    out2 = np.empty_like(G)
    results["reaction_fhn"] = _time(
        lambda: _kernels.fhn_rate(G, 0.1, 0.02, 10.0, out2))

    model = fl.make_fhn()
    prof = fl.solve_front(model, grid1)
    grid2 = Grid2D(400.0, n_y, grid1)
    u0 = make_perturbation("bounded_random", model, prof, grid2, 0.01)
    cfg = SimConfig(grid2, dt=0.02, t_end=0.2)

    def one_run():
        run(model, prof, u0, cfg)

    results["full_step"] = _time(one_run, repeat=3) / 10.0  # 10 steps inside
    return results


def main():
    if os.environ.get("_BENCH_CHILD"):
        print(json.dumps(run_cases()))
        return
    rows = {}
    for label, flag in (("numba", "1"), ("numpy", "0")):
        env = dict(os.environ, FRONTLAB_NUMBA=flag, _BENCH_CHILD="1")
        out = subprocess.run([sys.executable, __file__], env=env,
                             capture_output=True, text=True, check=True)
        rows[label] = json.loads(out.stdout.strip().splitlines()[-1])
    print(f"{'kernel':<18} {'numba [ms]':>12} {'numpy [ms]':>12} {'speedup':>9}")
    for case in _CASES:
        a = rows["numba"][case] * 1e3
        b = rows["numpy"][case] * 1e3
        print(f"{case:<18} {a:>12.3f} {b:>12.3f} {b / a:>8.1f}x")


if __name__ == "__main__":
    main()
