import numpy as np
import pytest

from frontlab import hj
from frontlab.errors import InvalidParameterError, TransformDomainError
from frontlab.grids import Field2D, Grid2D
from frontlab.simulator import make_perturbation


def test_transform_identity_at_beta_zero():
    sig = np.linspace(-2, 2, 17)
    assert np.array_equal(hj.cole_hopf(sig, 0.0), sig)
    assert np.array_equal(hj.inverse_cole_hopf(sig, 0.0), sig)


def test_transform_log2_point():
    assert hj.cole_hopf(np.array([np.log(2.0)]), 1.0)[0] == pytest.approx(1.0)


@pytest.mark.parametrize("beta", [-0.5, 0.0, 2.0])
def test_roundtrip(beta):
    rng = np.random.default_rng(12)
    sig = rng.uniform(-1.0, 1.0, 301)
    back = hj.inverse_cole_hopf(hj.cole_hopf(sig, beta), beta)
    assert np.max(np.abs(back - sig)) < 1e-13


def test_inverse_domain_error_names_index():
    with pytest.raises(TransformDomainError) as info:
        hj.inverse_cole_hopf(np.array([0.0, -3.0, 0.5]), 1.0)
    assert info.value.index == 1


def test_params_validation():
    p = hj.ColeHopfParams(c=0.3, d_perp=1.5)
    assert p.beta == pytest.approx(0.3 / 3.0, abs=1e-16)
    with pytest.raises(InvalidParameterError):
        hj.ColeHopfParams(c=0.3, d_perp=0.0)


def test_heat_multiplier_constant_and_mode():
    n_y, L = 128, 50.0
    y = L / n_y * np.arange(n_y)
    const = np.full(n_y, 2.5)
    assert np.max(np.abs(hj.heat_multiplier_step(const, 1.0, 1.3, L) - 2.5)) < 1e-14
    w = 2 * np.pi * 4 / L
    mode = np.cos(w * y)
    out = hj.heat_multiplier_step(mode, 1.0, 1.3, L)
    assert np.max(np.abs(out - np.exp(-1.3 * w**2) * mode)) < 1e-14


def test_heat_multiplier_against_periodized_kernel():
    n_y, L, d, t = 256, 60.0, 0.8, 2.0
    y = L / n_y * np.arange(n_y)
    v0 = np.exp(-((np.minimum(y, L - y)) / 3.0) ** 2)
    out = hj.heat_multiplier_step(v0, t, d, L)
    # direct convolution with the image-summed Gaussian kernel
    h = L / n_y
    kernel = np.zeros(n_y)
    for m in range(-25, 26):
        sep = (np.minimum(y, L - y) + m * L) if False else (y + m * L)
        kernel += np.exp(-(sep - 0.0) ** 2 / (4 * d * t))
    kernel *= h / np.sqrt(4 * np.pi * d * t)
    ref = np.real(np.fft.ifft(np.fft.fft(v0) * np.fft.fft(kernel)))
    assert np.max(np.abs(out - ref)) < 1e-10


def test_forced_zero_forcing_stays_zero():
    params = hj.ColeHopfParams(c=0.4, d_perp=1.0)
    out = hj.solve_forced_hj(lambda t: np.zeros(64), params, 64, 40.0, 2.0,
                             0.01, output_times=[1.0, 2.0])
    for mod in out:
        assert np.max(np.abs(mod.sigma)) == 0.0


def test_forced_linear_duhamel_oracle():
    # beta = 0 and unit-interval indicator forcing: per Fourier mode the
    # exact solution is -g0_hat (exp(-d w^2 (t-1)) - exp(-d w^2 t))/(d w^2)
    n_y, L, d = 128, 80.0, 1.2
    params = hj.ColeHopfParams(c=0.0, d_perp=d)
    y = L / n_y * np.arange(n_y)
    g0 = 0.01 * (np.sin(2 * np.pi * y / L) + 0.3 * np.cos(6 * np.pi * y / L))

    def g(t):
        return g0 if t <= 1.0 else np.zeros(n_y)

    t_end = 2.0
    out = hj.solve_forced_hj(g, params, n_y, L, t_end, 0.002,
                             output_times=[t_end])[0]
    w = 2 * np.pi * np.fft.rfftfreq(n_y, d=L / n_y)
    gh = np.fft.rfft(g0)
    with np.errstate(invalid="ignore", divide="ignore"):
        xih = -gh * (np.exp(-d * w**2 * (t_end - 1)) - np.exp(-d * w**2 * t_end)) \
            / (d * w**2)
    xih[0] = -gh[0]
    ref = np.fft.irfft(xih, n=n_y)
    assert np.max(np.abs(out.sigma - ref)) < 1e-8


def test_forced_vs_finite_difference():
    n_y, L, c, d = 512, 40.0, 0.3, 1.0
    params = hj.ColeHopfParams(c=c, d_perp=d)
    y = L / n_y * np.arange(n_y)

    def g(t):
        return 0.02 * np.exp(-t) * np.sin(2 * np.pi * y / L)

    out = hj.solve_forced_hj(g, params, n_y, L, 1.0, 0.002,
                             output_times=[1.0])[0]
    ref = hj.solve_hj_finite_difference(g, c, d, n_y, L, 1.0, 2e-4)
    assert np.max(np.abs(out.sigma - ref)) < 1e-6


def test_sigma_equation_residual_refines_with_dt():
    # residual of d_t sigma - d Lap sigma - (c/2)|grad sigma|^2 + g must
    # shrink ~4x when dt halves
    n_y, L, c, d = 256, 40.0, 0.5, 1.0
    params = hj.ColeHopfParams(c=c, d_perp=d)
    y = L / n_y * np.arange(n_y)

    def g(t):
        return 0.05 * np.exp(-0.3 * t) * (np.sin(2 * np.pi * y / L)
                                          + 0.4 * np.cos(4 * np.pi * y / L))

    resids = []
    for dt in (0.02, 0.01):
        t0 = 0.5
        ts = [t0 - dt, t0, t0 + dt]
        mods = hj.solve_forced_hj(g, params, n_y, L, t0 + dt, dt,
                                  output_times=ts)
        dsdt = (mods[2].sigma - mods[0].sigma) / (2 * dt)
        mid = mods[1]
        rhs = d * mid.lap_sigma + 0.5 * c * mid.grad_sigma**2 - g(t0)
        resids.append(np.max(np.abs(dsdt - rhs)))
    assert resids[0] / resids[1] > 3.0


def test_forced_blowup_detected():
    params = hj.ColeHopfParams(c=4.0, d_perp=0.5)  # beta = 4

    def g(t):
        return np.full(64, 10.0)

    with pytest.raises(TransformDomainError):
        hj.solve_forced_hj(g, params, 64, 40.0, 2.0, 0.05)


def test_effective_zero_for_front(nagumo_small):
    model, prof, adj, d_perp, _ = nagumo_small
    grid = Grid2D(80.0, 32, prof.grid)
    u0 = Field2D(grid, np.broadcast_to(prof.phi[None],
                                       (32, prof.grid.n_z, 1)).copy())
    params = hj.ColeHopfParams(c=prof.c, d_perp=d_perp)
    out = hj.solve_effective_hj(u0, prof, adj, params, [0.0, 3.0])
    for mod in out:
        assert np.max(np.abs(mod.sigma)) < 1e-12


def test_effective_initial_pairing_linearizes_shift(nagumo_small):
    model, prof, adj, d_perp, _ = nagumo_small
    grid = Grid2D(80.0, 32, prof.grid)
    s = 0.01
    u0 = make_perturbation("translation", model, prof, grid, 0.2, s=s)
    params = hj.ColeHopfParams(c=prof.c, d_perp=d_perp)
    out = hj.solve_effective_hj(u0, prof, adj, params, [0.0])[0]
    assert np.max(np.abs(out.sigma - s)) < 1e-4


def test_effective_exact_linear_mode(nagumo_sym_pack):
    # c = 0 front makes beta vanish, so a phi'-directed cosine perturbation
    # evolves as a pure heat mode of the paired amplitude
    model, prof, adj, d_perp, _ = nagumo_sym_pack
    grid = Grid2D(100.0, 64, prof.grid)
    A = 0.01
    w1 = 2 * np.pi / grid.y_length
    cosy = np.cos(w1 * grid.y)
    u0 = Field2D(grid, prof.phi[None] - A * cosy[:, None, None] * prof.dphi[None])
    params = hj.ColeHopfParams(c=prof.c, d_perp=d_perp)
    t = 4.0
    out = hj.solve_effective_hj(u0, prof, adj, params, [t])[0]
    expect = A * np.exp(-d_perp * w1**2 * t) * cosy
    assert np.max(np.abs(out.sigma - expect)) < 1e-8


def test_effective_maximum_principle(nagumo_small):
    model, prof, adj, d_perp, _ = nagumo_small
    grid = Grid2D(100.0, 64, prof.grid)
    u0 = make_perturbation("bounded_random", model, prof, grid, 0.05, seed=5)
    params = hj.ColeHopfParams(c=prof.c, d_perp=d_perp)
    out = hj.solve_effective_hj(u0, prof, adj, params, [0.0, 1.0, 10.0])
    s0 = np.max(np.abs(out[0].sigma))
    for mod in out[1:]:
        assert np.max(np.abs(mod.sigma)) <= s0 + 1e-12


def test_beta_branch_continuity():
    rng = np.random.default_rng(8)
    sig = rng.uniform(-0.5, 0.5, 65)
    a = hj.cole_hopf(sig, 0.0)
    b = hj.cole_hopf(sig, 1e-30)
    assert np.max(np.abs(a - b)) < 1e-9
    ia = hj.inverse_cole_hopf(sig, 0.0)
    ib = hj.inverse_cole_hopf(sig, 1e-30)
    assert np.max(np.abs(ia - ib)) < 1e-9
