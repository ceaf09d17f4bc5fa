"""Decay-rate fits, theorem-level comparisons, and report serialization."""
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import FitDomainError, OutOfMarginError
from .profile import pair_z
from .simulator import ColumnShifter, sponge_mask

__all__ = ["DecayFit", "fit_decay", "envelope_constant", "interface_estimate",
           "compare_modulated", "best_shift_error", "canonical_json",
           "config_hash", "make_report", "write_report"]


@dataclass(frozen=True)
class DecayFit:
    exponent: float          # p in the model amplitude * (1 + t)^(-p)
    log_corrected: bool
    window: tuple
    rms_residual: float
    bounded_ratio: float
    amplitude: float
    n_samples: int


def fit_decay(times, values, model="power", window=(5.0, 100.0)):
    """Least-squares decay fit on a time window.

    ``power`` fits values ~ A (1+t)^(-p) on log-log axes.  ``power_log``
    rescales by the reference shape log(2+t)/(1+t) and fits the remaining
    constant; its bounded_ratio is the max/min of the rescaled values, 1
    for data following the reference exactly.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    lo, hi = window
    sel = (times >= lo) & (times <= hi)
    t, v = times[sel], values[sel]
    if len(t) < 10:
        raise FitDomainError(f"need >= 10 samples in window {window}, got {len(t)}")
    if np.any(v <= 0):
        raise FitDomainError("decay fit needs positive values")
    if model == "power":
        X = np.column_stack([np.ones_like(t), np.log1p(t)])
        coef, *_ = np.linalg.lstsq(X, np.log(v), rcond=None)
        resid = np.log(v) - X @ coef
        q = v * (1.0 + t) ** (-coef[1])
        return DecayFit(exponent=-float(coef[1]), log_corrected=False,
                        window=(float(lo), float(hi)),
                        rms_residual=float(np.sqrt(np.mean(resid**2))),
                        bounded_ratio=float(np.max(q) / np.min(q)),
                        amplitude=float(np.exp(coef[0])), n_samples=len(t))
    if model == "power_log":
        q = v * (1.0 + t) / np.log(2.0 + t)
        logc = float(np.mean(np.log(q)))
        resid = np.log(q) - logc
        return DecayFit(exponent=1.0, log_corrected=True,
                        window=(float(lo), float(hi)),
                        rms_residual=float(np.sqrt(np.mean(resid**2))),
                        bounded_ratio=float(np.max(q) / np.min(q)),
                        amplitude=float(np.exp(logc)), n_samples=len(t))
    raise FitDomainError(f"unknown fit model '{model}'")


def envelope_constant(times, values, model_values):
    """Smallest C with values <= C * model pointwise on the samples."""
    times = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    m = np.asarray(model_values, dtype=float)
    return float(np.max(v / m))


def interface_estimate(u, profile, adjoint):
    """Leading-order interface position <e*, phi - u(y, .)> per column."""
    return pair_z(adjoint.weighted(), profile.phi[None, :, :] - u.values)


def compare_modulated(u, sigma_like, profile, mask=None, shifter=None):
    """Sup distance between u and the front displaced by ``sigma_like``.

    The sup runs over the sponge-masked grid; shifts beyond the margin
    raise :class:`OutOfMarginError` (from the shifter).
    """
    sigma = np.asarray(sigma_like, dtype=float)
    shifter = shifter or ColumnShifter(u.grid.zgrid)
    moved = shifter.shift_profile(profile.phi, -sigma, n_y=u.grid.n_y)
    if mask is None:
        mask = sponge_mask(u.grid.zgrid)
    return float(np.max(np.abs((u.values - moved)[:, mask, :])))


def best_shift_error(z, values, reference, bracket=1.0, tol=1e-12):
    """Realign a 1D profile against a reference callable.

    Golden-section search of the shift minimizing the sup error; returns
    ``(error, shift)``.
    """
    values = np.asarray(values, dtype=float).ravel()

    def err(s):
        return float(np.max(np.abs(values - reference(z - s))))

    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = -bracket, bracket
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc, fd = err(c), err(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = err(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = err(d)
    s = 0.5 * (a + b)
    return err(s), s


# ---------------------------------------------------------------------------
# deterministic reports
# ---------------------------------------------------------------------------

def _jsonify(obj):
    if isinstance(obj, dict):
        return "{" + ",".join(
            f"{json.dumps(str(k))}:{_jsonify(obj[k])}" for k in sorted(obj)) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_jsonify(x) for x in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _jsonify(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if x != x or x in (float("inf"), float("-inf")):
            return json.dumps(str(x))
        return format(x, ".17g")
    return json.dumps(obj)


def canonical_json(obj):
    """Sorted keys, floats at 17 significant digits, no whitespace."""
    return _jsonify(obj)


def config_hash(cfg):
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


def make_report(name, config, metrics, criteria, extra=None):
    """Assemble the canonical report structure for one experiment.

    ``criteria`` is a list of dicts with keys name/value/threshold/op; the
    pass flag is derived here so reports cannot disagree with their data.
    """
    ops = {"<=": lambda v, th: v <= th, ">=": lambda v, th: v >= th,
           "<": lambda v, th: v < th, ">": lambda v, th: v > th,
           "in": lambda v, th: th[0] <= v <= th[1]}
    rows = []
    for c in criteria:
        ok = bool(ops[c["op"]](c["value"], c["threshold"]))
        rows.append({"name": c["name"], "value": c["value"],
                     "threshold": c["threshold"], "op": c["op"], "pass": ok})
    report = {
        "version": 1,
        "experiment": name,
        "config": config,
        "config_sha256": config_hash(config),
        "metrics": metrics,
        "criteria": rows,
        "pass": all(r["pass"] for r in rows),
    }
    if extra:
        report["extra"] = extra
    return report


def write_report(report, out_dir, csv_tables=None):
    """Write report.json (canonical bytes) and optional CSV tables."""
    import os
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "report.json")
    with open(path, "w") as fh:
        fh.write(canonical_json(report))
        fh.write("\n")
    written = [path]
    for fname, (header, rows) in (csv_tables or {}).items():
        p = os.path.join(out_dir, fname)
        with open(p, "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(format(float(x), ".17g") for x in row) + "\n")
        written.append(p)
    return written
