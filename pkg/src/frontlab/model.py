"""Reaction-diffusion system definitions and bistability validation."""
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import InvalidParameterError, ModelConstructionError

__all__ = [
    "ReactionModel", "BistabilityReport", "make_nagumo", "make_fhn",
    "rotate_model", "validate_bistable", "validate_model", "model_from_config",
]


@dataclass(frozen=True)
class ReactionModel:
    """A system du/dt = D Lap(u) + f(u) with two stable rest states.

    Attributes
    ----------
    n : int
        Component count.
    D : ndarray
        Symmetric positive-definite diffusion matrix, shape (n, n).
    f : callable
        Reaction rate, maps (n,) -> (n,).
    df : callable
        Jacobian of ``f``, maps (n,) -> (n, n).
    phi_minus, phi_plus : ndarray
        Rest states approached as z -> -inf and z -> +inf.
    f_field : callable, optional
        Vectorized reaction rate over (..., n) arrays.  Built-in models
        supply fused implementations; the fallback loops over points.
    """

    n: int
    D: np.ndarray
    f: Callable
    df: Callable
    phi_minus: np.ndarray
    phi_plus: np.ndarray
    name: str = "model"
    f_field: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "phi_minus",
                           np.atleast_1d(np.asarray(self.phi_minus, dtype=float)))
        object.__setattr__(self, "phi_plus",
                           np.atleast_1d(np.asarray(self.phi_plus, dtype=float)))
        if D.shape != (self.n, self.n):
            raise InvalidParameterError("D must be n x n")
        if np.max(np.abs(D - D.T)) > 1e-14 * max(1.0, np.max(np.abs(D))):
            raise InvalidParameterError("D must be symmetric")
        if np.min(np.linalg.eigvalsh(D)) <= 0:
            raise InvalidParameterError("D must be positive definite")

    def rate(self, U):
        """Reaction rate on an (..., n) array."""
        if self.f_field is not None:
            return self.f_field(U)
        flat = U.reshape(-1, self.n)
        out = np.empty_like(flat)
        for i in range(flat.shape[0]):
            out[i] = self.f(flat[i])
        return out.reshape(U.shape)

    def jacobian_samples(self, states):
        """Jacobian stack (m, n, n) along a sampled curve (m, n)."""
        states = np.atleast_2d(states)
        out = np.empty((states.shape[0], self.n, self.n))
        for i, u in enumerate(states):
            out[i] = self.df(u)
        return out

    def diffusion_eig(self):
        """Orthogonal eigendecomposition D = Q diag(lam) Q^T."""
        lam, Q = np.linalg.eigh(self.D)
        return lam, Q


@dataclass(frozen=True)
class BistabilityReport:
    ok: bool
    worst_margin: float
    worst_k: float
    worst_state: str
    threshold: float


def validate_model(model, zero_tol=1e-12, jac_tol=1e-6, n_probe=100, seed=1234):
    """Check rest states and the Jacobian against finite differences.

    Probes lie in the cube spanned by the rest states inflated by 0.5.
    Raises ``ModelConstructionError`` on failure.
    """
    for state, tag in ((model.phi_minus, "phi_minus"), (model.phi_plus, "phi_plus")):
        r = np.max(np.abs(model.f(state)))
        if r > zero_tol:
            raise ModelConstructionError(f"|f({tag})| = {r:.2e} exceeds {zero_tol:.1e}")
    rng = np.random.default_rng(seed)
    lo = np.minimum(model.phi_minus, model.phi_plus) - 0.5
    hi = np.maximum(model.phi_minus, model.phi_plus) + 0.5
    eps = 1e-6
    for _ in range(n_probe):
        u = lo + (hi - lo) * rng.random(model.n)
        J = np.asarray(model.df(u), dtype=float)
        J_fd = np.empty_like(J)
        for j in range(model.n):
            e = np.zeros(model.n)
            e[j] = eps
            J_fd[:, j] = (np.asarray(model.f(u + e)) - np.asarray(model.f(u - e))) / (2 * eps)
        scale = max(1.0, np.max(np.abs(J)))
        if np.max(np.abs(J - J_fd)) / scale > jac_tol:
            raise ModelConstructionError(
                f"Jacobian mismatch {np.max(np.abs(J - J_fd)) / scale:.2e} at u={u}")
    if model.f_field is not None:
        u = lo + (hi - lo) * rng.random((7, model.n))
        direct = np.stack([model.f(x) for x in u])
        if np.max(np.abs(model.f_field(u) - direct)) > 1e-13:
            raise ModelConstructionError("f_field disagrees with f")
    return True


def make_nagumo(a, name=None):
    """Scalar cubic bistable model u (1 - u)(u - a) with unit diffusion."""
    if not 0.0 < a < 1.0:
        raise InvalidParameterError(f"threshold a must lie in (0, 1), got {a}")
    a = float(a)

    def f(u):
        return np.array([u[0] * (1.0 - u[0]) * (u[0] - a)])

    def df(u):
        return np.array([[-3.0 * u[0] ** 2 + 2.0 * (1.0 + a) * u[0] - a]])

    def f_field(U):
        out = np.empty_like(U)
        _kernels.nagumo_rate(np.ascontiguousarray(U[..., 0]), a, out[..., 0])
        return out

    model = ReactionModel(
        n=1, D=np.array([[1.0]]), f=f, df=df,
        phi_minus=np.array([1.0]), phi_plus=np.array([0.0]),
        name=name or f"nagumo(a={a:g})", f_field=f_field,
        params={"a": a})
    validate_model(model)
    return model


def _newton_root(f, df, x0, tol=1e-13, max_iter=100):
    x = np.array(x0, dtype=float)
    for _ in range(max_iter):
        r = np.asarray(f(x), dtype=float)
        if np.max(np.abs(r)) < tol:
            return x
        x = x - np.linalg.solve(np.asarray(df(x), dtype=float), r)
    raise ModelConstructionError(
        f"end-state Newton failed from {x0}; residual {np.max(np.abs(r)):.2e}")


def make_fhn(a=0.1, eps=0.02, gamma=10.0, delta=0.5, name=None):
    """Two-component FitzHugh-Nagumo style model.

    f(u, w) = (u (1 - u)(u - a) - w, eps (u - gamma w)), D = diag(1, delta).
    Rest states are solved by Newton from the seeds (0, 0) and (1, 1/gamma);
    bistability of the result is not implied and should be checked with
    :func:`validate_bistable`.
    """
    if eps <= 0 or delta <= 0 or gamma < 0:
        raise InvalidParameterError("need eps > 0, delta > 0, gamma >= 0")
    a, eps, gamma, delta = float(a), float(eps), float(gamma), float(delta)

    def f(u):
        return np.array([u[0] * (1.0 - u[0]) * (u[0] - a) - u[1],
                         eps * (u[0] - gamma * u[1])])

    def df(u):
        return np.array([[-3.0 * u[0] ** 2 + 2.0 * (1.0 + a) * u[0] - a, -1.0],
                         [eps, -eps * gamma]])

    def f_field(U):
        out = np.empty_like(U)
        _kernels.fhn_rate(np.ascontiguousarray(U), a, eps, gamma, out)
        return out

    phi_plus = _newton_root(f, df, np.zeros(2))
    phi_minus = _newton_root(f, df, np.array([1.0, 1.0 / gamma if gamma > 0 else 0.0]))
    if np.max(np.abs(phi_minus - phi_plus)) < 1e-8:
        raise ModelConstructionError(
            "the two Newton seeds collapsed onto one rest state")
    model = ReactionModel(
        n=2, D=np.diag([1.0, delta]), f=f, df=df,
        phi_minus=phi_minus, phi_plus=phi_plus,
        name=name or f"fhn(a={a:g},eps={eps:g},gamma={gamma:g},delta={delta:g})",
        f_field=f_field,
        params={"a": a, "eps": eps, "gamma": gamma, "delta": delta})
    validate_model(model)
    return model


def rotate_model(model, Q, name=None):
    """Conjugate a model by an orthogonal matrix: u -> Q u.

    Produces an equivalent system with non-diagonal diffusion; all spectral
    quantities and coefficients are invariant under this substitution.
    """
    Q = np.asarray(Q, dtype=float)
    if np.max(np.abs(Q @ Q.T - np.eye(model.n))) > 1e-12:
        raise InvalidParameterError("Q must be orthogonal")
    Qt = Q.T
    base_field = model.f_field

    def f(u):
        return Q @ np.asarray(model.f(Qt @ u))

    def df(u):
        return Q @ np.asarray(model.df(Qt @ u)) @ Qt

    f_field = None
    if base_field is not None:
        def f_field(U):
            return base_field(U @ Q) @ Qt

    return ReactionModel(
        n=model.n, D=Q @ model.D @ Qt, f=f, df=df,
        phi_minus=Q @ model.phi_minus, phi_plus=Q @ model.phi_plus,
        name=name or f"rotated({model.name})", f_field=f_field,
        params=dict(model.params))


def validate_bistable(model, k_max=10.0, n_k=200, margin_threshold=-1e-8):
    """Check that both rest states damp every transverse frequency.

    Scans k on a uniform grid of [0, k_max] and reports the worst real part
    of the spectra of f'(phi_pm) - k^2 D.
    """
    ks = np.linspace(0.0, k_max, n_k)
    worst = -np.inf
    worst_k = 0.0
    worst_state = ""
    for state, tag in ((model.phi_minus, "phi_minus"), (model.phi_plus, "phi_plus")):
        J = np.asarray(model.df(state), dtype=float)
        for k in ks:
            m = float(np.max(np.real(np.linalg.eigvals(J - k * k * model.D))))
            if m > worst:
                worst, worst_k, worst_state = m, float(k), tag
    return BistabilityReport(ok=worst < margin_threshold, worst_margin=worst,
                             worst_k=worst_k, worst_state=worst_state,
                             threshold=margin_threshold)


_BUILTINS = {"nagumo": make_nagumo, "fhn": make_fhn}


def model_from_config(cfg, tolerances=None):
    """Build a model from {"name": ..., "params": {...}}.

    ``tolerances`` may tighten the construction checks, e.g.
    ``{"zero": 1e-13, "jacobian": 1e-7}``.
    """
    from .errors import ConfigError
    if not isinstance(cfg, dict) or "name" not in cfg:
        raise ConfigError("model config must be an object with a 'name'")
    name = cfg["name"]
    if name not in _BUILTINS:
        raise ConfigError(
            f"unknown model '{name}'; available: {sorted(_BUILTINS)}")
    try:
        model = _BUILTINS[name](**cfg.get("params", {}))
    except TypeError as exc:
        raise ConfigError(f"bad parameters for model '{name}': {exc}") from exc
    if tolerances:
        validate_model(model,
                       zero_tol=tolerances.get("zero", 1e-12),
                       jac_tol=tolerances.get("jacobian", 1e-6))
    return model


def with_end_state(model, which, state):
    """Copy of the model with one rest state replaced (diagnostics only)."""
    return replace(model, **{which: np.atleast_1d(np.asarray(state, float))})
