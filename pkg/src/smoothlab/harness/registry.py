"""Estimate registry: one runner per id, with its defaults and pass thresholds.

A runner takes a resolved parameter dict and returns an :class:`Outcome`.
Identities pass on absolute tolerances.  Inequality sweeps pass when every
ratio is finite and the family-wide sup is stable under refinement.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ConfigError, UsageError
from ..evolution import (SpaceTimeField, TimeGrid, WaveForcing, duhamel, equation_residual, propagate,
                         smoothing_ratio)
from ..grid import FREQUENCY, PHYSICAL, Field, GridSpec, forward_ft, gaussian, inverse_ft
from ..multiplier import (case3_identity_residual, check_commutator_delta, check_kappa, freq_commutator_ratio,
                          homogeneous_power, riesz_symbol, splitting_residual, stein_weiss_ratio,
                          stein_weiss_special_ratio, weight_commutator_ratio)
from ..report import RatioReport, grid_meta
from ..resolvent import (kato_identity_details, make_zeta_grid, polarization_check, poisson_trace_residual,
                         pv_vanish, resolvent_form, resolvent_identity_residual, resolvent_sup_ratio)
from ..symbol import euclid, from_config
from ..trace import (build_quad, check_hoelder_theta, check_lowfreq_theta, coarea_residual, hoelder_ratio,
                     lowfreq_slope, trace_norm, trace_ratio)
from .family import FamilySpec, make_family, spectral_gaussian

THREADS_ENV = "SMOOTHLAB_THREADS"
# parameters a sweep config must state explicitly
PHYSICAL_KEYS = ("m", "n", "delta", "L", "N", "T", "M")


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc


def pmap(fn, items):
    """``list(map(fn, items))``, threaded when ``SMOOTHLAB_THREADS > 1``."""
    items = list(items)
    workers = thread_count()
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- outcomes ---------------------------------------------------------------------


@dataclass
class Outcome:
    estimate_id: str
    params: dict
    passed: bool
    metrics: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    negative_control: bool = False

    def summary(self) -> dict:
        ratios = [r.ratio for r in self.rows]
        return {
            "schema_version": 1,
            "estimate_id": self.estimate_id,
            "passed": bool(self.passed),
            "negative_control": self.negative_control,
            "params": {k: _jsonable(v) for k, v in self.params.items()},
            "metrics": {k: _jsonable(v) for k, v in self.metrics.items()},
            "thresholds": {k: _jsonable(v) for k, v in self.thresholds.items()},
            "rows": len(self.rows),
            "sup_ratio": max(ratios) if ratios else None,
        }


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _rel(a, b):
    return abs(a - b) / abs(b) if b else abs(a - b)


def _sweep_outcome(eid, P, coarse, fine, max_delta, extra_metrics=None, extra_pass=True):
    """Pass/fail for an inequality sweep from rows on the base grid and the refined grid."""
    rows = coarse + fine
    finite = all(r.finite for r in rows)
    sup_c = max(r.ratio for r in coarse)
    sup_f = max(r.ratio for r in fine)
    delta = _rel(sup_f, sup_c)
    for rc, rf in zip(coarse, fine):
        rf.aux["refinement_delta"] = _rel(rf.ratio, rc.ratio)
    significant = [r.aux["refinement_delta"] for r in fine if r.ratio >= 1e-3 * sup_f]
    metrics = {"sup_ratio": sup_f, "sup_ratio_coarse": sup_c, "refinement_delta": delta,
               "member_delta_max": max(significant), "all_finite": finite}
    metrics.update(extra_metrics or {})
    control = bool(P.get("negative_control", False))
    passed = True if control else bool(finite and delta <= max_delta and extra_pass)
    return Outcome(eid, P, passed, metrics, {"refinement_delta": max_delta}, rows, control)


def _identity_outcome(eid, P, metrics, limits):
    """Pass when every ``metrics[k] <= limits[k]``."""
    passed = all(metrics[k] <= v for k, v in limits.items())
    return Outcome(eid, P, passed, metrics, limits)


# -- parameter handling --------------------------------------------------------------

_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _coerce(key, kind, value):
    try:
        if kind == "float":
            return float(value)
        if kind == "int":
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if kind == "str":
            return str(value)
        if kind == "bool":
            return value if isinstance(value, bool) else _BOOL[str(value).lower()]
        if kind == "floats":
            if isinstance(value, str):
                value = [v for v in value.replace(";", ",").split(",") if v.strip()]
            return tuple(float(v) for v in value)
        if kind == "vectors":
            if isinstance(value, str):
                value = [part.split(",") for part in value.split(";") if part.strip()]
            return tuple(tuple(float(c) for c in v) for v in value)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"parameter {key!r}: cannot read {value!r} as {kind}") from exc
    raise ConfigError(f"parameter {key!r}: unknown kind {kind}")


@dataclass(frozen=True)
class Estimate:
    id: str
    statement: str
    kind: str  # "identity" or "inequality"
    params: dict  # name -> (kind, default)
    runner: Callable

    def resolve(self, overrides: dict = None, explicit: bool = False) -> dict:
        """Defaults merged with ``overrides``; ``explicit`` demands every physical key be given."""
        overrides = dict(overrides or {})
        unknown = sorted(set(overrides) - set(self.params))
        if unknown:
            raise ConfigError(f"{self.id}: unknown parameter(s) {unknown}; accepted: {sorted(self.params)}")
        if explicit:
            missing = [k for k in PHYSICAL_KEYS if k in self.params and k not in overrides]
            if missing:
                raise ConfigError(f"{self.id}: config must set {missing} explicitly")
        out = {}
        for key, (kind, default) in self.params.items():
            out[key] = _coerce(key, kind, overrides[key]) if key in overrides else default
        return out

    def run(self, overrides: dict = None, explicit: bool = False) -> Outcome:
        return self.runner(self.id, self.resolve(overrides, explicit))


# -- shared helpers ----------------------------------------------------------------------


def _symbol(P):
    return from_config(P["symbol"], P["n"], P["m"], P.get("epsilon", 0.0))


def _family(P, grid, min_nyquist=None):
    spec = FamilySpec(base=P.get("base", "gaussian"), dilations=P["dilations"],
                      translations=P.get("translations", ()), modulations=P.get("modulations", ()),
                      seed=P.get("seed", 0), scale_grids=True)
    if min_nyquist is not None and grid is not None:
        # the refined grid doubles whatever the base grid needed
        min_nyquist = min_nyquist * grid.N / P["N"]
    return make_family(spec, grid, min_nyquist=min_nyquist)


def _both_grids(P):
    g = GridSpec(P["n"], P["L"], P["N"])
    return g, g.refined()


def _random_field(rng, grid):
    return Field(grid, PHYSICAL, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))


# -- grid / evolution identities -------------------------------------------------------


def run_plancherel(eid, P):
    g = GridSpec(P["n"], P["L"], P["N"])
    rng = np.random.default_rng(P["seed"])
    planch = roundtrip = parseval = 0.0
    for _ in range(P["count"]):
        f, h = _random_field(rng, g), _random_field(rng, g)
        F, H = forward_ft(f), forward_ft(h)
        planch = max(planch, _rel(F.norm(), f.norm()))
        roundtrip = max(roundtrip, np.linalg.norm(inverse_ft(F).values - f.values) / np.linalg.norm(f.values))
        parseval = max(parseval, abs(F.inner(H) - f.inner(h)) / (f.norm() * h.norm()))
    metrics = {"plancherel": planch, "roundtrip": float(roundtrip), "parseval": float(parseval)}
    return _identity_outcome(eid, P, metrics, {k: P["tol"] for k in metrics})


def run_gaussian_duality(eid, P):
    n = P["n"]
    g = GridSpec(n, P["L"], P["N"])
    xi = g.xi
    x0 = np.full(n, P["shift"])
    k0 = np.full(n, -0.5 * P["shift"])
    ghat = lambda c: np.exp(-np.sum((xi - c) ** 2, axis=-1) / 2)
    self_dual = np.max(np.abs(forward_ft(gaussian(g)).values - ghat(0)))
    trans = np.max(np.abs(forward_ft(gaussian(g, center=x0)).values - np.exp(-1j * xi @ x0) * ghat(0)))
    modul = np.max(np.abs(forward_ft(gaussian(g, modulation=k0)).values - ghat(k0)))
    metrics = {"self_duality": float(self_dual), "translation": float(trans), "modulation": float(modul)}
    return _identity_outcome(eid, P, metrics, {k: P["tol"] for k in metrics})


def run_propagator(eid, P):
    spec = _symbol(P)
    g = GridSpec(P["n"], P["L"], P["N"])
    rng = np.random.default_rng(P["seed"])
    phi = make_family(FamilySpec(base="random_bandlimited", seed=P["seed"]), g)[0].field
    unit = group = 0.0
    for _ in range(5):
        s, t = rng.uniform(-2, 2, 2)
        unit = max(unit, _rel(propagate(phi, spec, t).norm(), phi.norm()))
        lhs = propagate(propagate(phi, spec, t), spec, s).values
        rhs = propagate(phi, spec, s + t).values
        group = max(group, np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
    metrics = {"unitarity": float(unit), "group_law": float(group)}
    limits = {"unitarity": P["tol"], "group_law": P["tol"]}
    if spec.label() == "euclid" and spec.m == 2:
        n = g.n
        r2 = np.sum(g.x**2, axis=-1)
        err = 0.0
        for t in P["times"]:
            beta = 1 - 2j * t
            exact = beta ** (-n / 2) * np.exp(-r2 / (2 * beta))
            err = max(err, np.max(np.abs(propagate(gaussian(g), spec, t).values - exact)))
        metrics["closed_form"] = float(err)
        limits["closed_form"] = P["closed_form_tol"]
    return _identity_outcome(eid, P, metrics, limits)


def _duhamel_errors(P):
    spec = _symbol(P)
    g = GridSpec(P["n"], P["L"], P["N"])
    psi = gaussian(g, center=np.full(g.n, 0.5))
    wf = WaveForcing(psi * (1 / psi.norm()), P["sigma"])
    exact_err, eq_res, steps = [], [], []
    for level in range(P["levels"]):
        tg = TimeGrid(P["T"], P["M"] * 2**level)
        f = wf.frames(spec, tg)
        G, E = duhamel(f, spec).values, wf.exact_duhamel(spec, tg).values
        w = tg.weights.reshape((-1,) + (1,) * g.n)
        exact_err.append(float(np.sqrt(np.sum(w * np.abs(G - E) ** 2) / np.sum(w * np.abs(E) ** 2))))
        eq_res.append(equation_residual(0 * psi, f, spec))
        steps.append(tg.steps)
    return steps, exact_err, eq_res


def run_duhamel_order(eid, P):
    steps, exact_err, eq_res = _duhamel_errors(P)
    orders = [float(np.log2(a / b)) for a, b in zip(eq_res, eq_res[1:])]
    exact_orders = [float(np.log2(a / b)) for a, b in zip(exact_err, exact_err[1:])]
    metrics = {"steps": steps, "equation_residual": eq_res, "exact_error": exact_err,
               "orders": orders, "exact_orders": exact_orders, "order": orders[-1]}
    passed = orders[-1] >= P["min_order"] and exact_orders[-1] >= P["min_order"]
    return Outcome(eid, P, passed, metrics, {"min_order": P["min_order"]})


def run_kato_chain(eid, P):
    spec = _symbol(P)
    g = GridSpec(P["n"], P["L"], P["N"])
    tg = TimeGrid(P["T"], P["M"])
    v = P["velocity"]
    F = SpaceTimeField.from_function(
        tg, g, lambda t, x: np.exp(-t * t / 2) * np.exp(-np.sum((x - v * t) ** 2, axis=-1) / 2)
        * np.exp(1j * x[..., 0]))
    deriv = homogeneous_power(P["deriv"])
    d = kato_identity_details(P["weight"], deriv, F, spec, P["etas"], P["tau_density"])
    metrics = {"A": d["A"], "B": d["B"], "B_extrap": d["B_extrap"], "residual": d["residual"]}
    if P["check_density"]:
        d2 = kato_identity_details(P["weight"], deriv, F, spec, P["etas"], 2 * P["tau_density"])
        metrics["tau_density_delta"] = abs(d2["B_extrap"] - d["B_extrap"]) / d["A"]
    return _identity_outcome(eid, P, metrics, {"residual": P["tol"]})


# -- trace ------------------------------------------------------------------------------


def run_coarea(eid, P):
    spec = _symbol(P)
    g = GridSpec(P["n"], P["L"], P["N"])
    F = Field(g, FREQUENCY, np.exp(-np.sum(g.xi**2, axis=-1)).astype(complex))
    levels = [(int(a), int(b)) for a, b in P["levels"]]
    res = [coarea_residual(F, spec, tq, sr) for tq, sr in levels]
    tol = P["tol"] if P["tol"] > 0 else (1e-6 if spec.label() == "euclid" else 1e-4)
    metrics = {"levels": levels, "residuals": res, "final": res[-1], "improving": res[-1] <= res[0]}
    passed = res[-1] <= tol and res[-1] <= res[0]
    return Outcome(eid, P, passed, metrics, {"final": tol})


def run_trace_closed_form(eid, P):
    g = GridSpec(2, P["L"], P["N"])
    f = gaussian(g)
    spec = euclid(2)
    errs = []
    for tau in P["taus"]:
        val = trace_norm(f, build_quad(spec, tau, P["resolution"])) ** 2
        errs.append(_rel(val, 2 * np.pi * tau * np.exp(-tau * tau)))
    return _identity_outcome(eid, P, {"errors": errs, "max_error": max(errs)}, {"max_error": P["tol"]})


def _trace_rows(eid, P, spec, members, fn):
    rows = []
    for mem in members:
        for key, (lhs, rhs, extra) in fn(mem):
            params = {"n": spec.n, "symbol": spec.label(), "theta": P["theta"], **extra}
            rows.append(RatioReport(eid, f"{mem.member_id};{key}", lhs, rhs, params,
                                    grid_meta(mem.field.grid, resolution=P["resolution"])))
    return rows


def _level_reach(spec, tau):
    """Largest coordinate on ``Sigma(tau)``, padded so the member spectrum is resolved there."""
    return 1.05 * float(np.max(np.abs(build_quad(spec, tau, 64).nodes)))


def _trace_rhs(f, theta):
    from ..grid import weighted_norm
    return weighted_norm(f, 0.5 + theta)


def run_l13_trace(eid, P):
    spec = _symbol(P)
    gc, gf = _both_grids(P)
    taus = np.geomspace(P["tau_min"], P["tau_max"], P["tau_count"])
    quads = {float(t): build_quad(spec, float(t), P["resolution"]) for t in taus}

    def fn(mem):
        rhs = _trace_rhs(mem.field, P["theta"])
        trace_ratio(mem.field, quads[float(taus[0])], P["theta"])  # hypothesis gate
        return [(f"tau={t:.6g}", (trace_norm(mem.field, q), rhs, {"tau": t})) for t, q in quads.items()]

    reach = _level_reach(spec, taus[-1])
    coarse = _trace_rows(eid, P, spec, _family(P, gc, reach), fn)
    fine = _trace_rows(eid, P, spec, _family(P, gf, reach), fn)
    return _sweep_outcome(eid, P, coarse, fine, P["max_delta"])


def run_l13_hoelder(eid, P):
    spec = _symbol(P)
    check_hoelder_theta(spec.n, P["theta"])
    gc, gf = _both_grids(P)
    levels = P["levels"]
    pairs = [(t, l) for t in levels for l in levels if t != l]
    rhs_theta = P["theta"]

    def fn(mem):
        rhs = _trace_rhs(mem.field, rhs_theta)
        out = []
        for t, l in pairs:
            r = hoelder_ratio(mem.field, spec, t, l, rhs_theta, P["resolution"])
            out.append((f"tau={t:g};lam={l:g}", (r * rhs, rhs, {"tau": t, "lam": l})))
        return out

    reach = _level_reach(spec, max(levels))
    coarse = _trace_rows(eid, P, spec, _family(P, gc, reach), fn)
    fine = _trace_rows(eid, P, spec, _family(P, gf, reach), fn)
    return _sweep_outcome(eid, P, coarse, fine, P["max_delta"], {"pairs": len(pairs)})


def run_l13_lowfreq(eid, P):
    spec = _symbol(P)
    check_lowfreq_theta(spec.n, P["theta"])
    gc, gf = _both_grids(P)
    taus = list(P["taus"])
    slope, _ = lowfreq_slope(gaussian(gc), spec, taus, P["theta"], P["resolution"])

    def fn(mem):
        _, ratios = lowfreq_slope(mem.field, spec, taus, P["theta"], P["resolution"])
        rhs = _trace_rhs(mem.field, P["theta"])
        return [(f"tau={t:g}", (r * rhs, rhs, {"tau": t})) for t, r in zip(taus, ratios)]

    coarse = _trace_rows(eid, P, spec, _family(P, gc), fn)
    fine = _trace_rows(eid, P, spec, _family(P, gf), fn)
    target = (spec.n - 1) / 2
    ok = abs(slope - target) <= P["slope_tol"]
    return _sweep_outcome(eid, P, coarse, fine, P["max_delta"],
                          {"slope": slope, "slope_target": target, "slope_ok": ok}, ok)


# -- smoothing -----------------------------------------------------------------------------


def _smoothing_rows(eid, P, estimate, members):
    spec = _symbol(P)
    control = P["negative_control"]
    method = "window" if control else P["method"]
    delta = P["delta"] if estimate.startswith("I_") else None

    def one(mem):
        lam = mem.dilation
        tg = TimeGrid(P["T"] / lam**spec.m, P["M"]) if method == "window" else None
        if estimate.endswith("homog"):
            data = mem.field
        elif method == "full":
            data = WaveForcing(mem.field, P["sigma"] / lam**spec.m)
        else:
            data = WaveForcing(mem.field, P["sigma"] / lam**spec.m).frames(spec, tg)
        return smoothing_ratio(data, spec, estimate, delta, time_grid=tg, method=method,
                               member_id=mem.member_id, Q=P["Q"], enforce=not control)

    return pmap(one, members)


def _smoothing_runner(estimate):
    def run(eid, P):
        spec = _symbol(P)
        from ..evolution import estimate_setup
        estimate_setup(estimate, spec, P["delta"] if estimate.startswith("I_") else None,
                       enforce=not P["negative_control"])
        gc, gf = _both_grids(P)
        coarse = _smoothing_rows(eid, P, estimate, _family(P, gc))
        fine = _smoothing_rows(eid, P, estimate, _family(P, gf))
        extra = {}
        if P["method"] == "window" or P["negative_control"]:
            P2 = dict(P, T=2 * P["T"], M=2 * P["M"])
            longer = _smoothing_rows(eid, P2, estimate, _family(P, gc))
            extra["window_delta"] = _rel(max(r.ratio for r in longer), max(r.ratio for r in coarse))
            extra["tail_max"] = max(r.aux.get("tail", 0.0) for r in coarse)
        out = _sweep_outcome(eid, P, coarse, fine, P["max_delta"], extra,
                             extra.get("window_delta", 0.0) <= P["max_delta"])
        return out
    return run


# -- resolvent ------------------------------------------------------------------------------


def _resolvent_rows(eid, P, estimate, members, halved=False):
    spec = _symbol(P)
    delta = P["delta"] if estimate == "T12_I" else None

    def one(mem):
        lam = mem.dilation
        scale = lam**spec.m
        zg = make_zeta_grid(P["Lambda"] * scale, P["eta_max"] * scale, P["eta_min"] * scale,
                            n_eta=P["n_eta"], n_bulk=P["n_bulk"])
        if halved:
            zg = zg.halved_floor()
        row = resolvent_sup_ratio([mem.field], spec, estimate, zg, delta, member_ids=[mem.member_id],
                                  enforce=not P["negative_control"])[0]
        row.estimate_id = eid
        return row

    return pmap(one, members)


def _resolvent_runner(estimate):
    def run(eid, P):
        from ..resolvent import resolvent_setup
        spec = _symbol(P)
        resolvent_setup(estimate, spec, P["delta"] if estimate == "T12_I" else None,
                        enforce=not P["negative_control"])
        gc, gf = _both_grids(P)
        members = _family(P, gc)
        base = _resolvent_rows(eid, P, estimate, members)
        halved = _resolvent_rows(eid, P, estimate, members, halved=True)
        eta_delta = _rel(max(r.ratio for r in halved), max(r.ratio for r in base))
        extra = {"eta_floor_delta": eta_delta}
        if P["refine"]:
            fine = _resolvent_rows(eid, P, estimate, _family(P, gf))
            out = _sweep_outcome(eid, P, base, fine, P["max_delta"], extra, eta_delta <= P["max_eta_delta"])
        else:
            finite = all(r.finite for r in base + halved)
            control = P["negative_control"]
            extra.update({"sup_ratio": max(r.ratio for r in halved), "all_finite": finite})
            passed = True if control else bool(finite and eta_delta <= P["max_eta_delta"])
            out = Outcome(eid, P, passed, extra, {}, base + halved, control)
        out.thresholds["eta_floor_delta"] = P["max_eta_delta"]
        return out
    return run


def run_resolvent_identity(eid, P):
    spec = _symbol(P)
    g = GridSpec(P["n"], P["L"], P["N"])
    rng = np.random.default_rng(P["seed"])
    worst = 0.0
    for _ in range(P["count"]):
        f = _random_field(rng, g)
        z1, z2 = complex(*rng.uniform(-3, 3, 2)), complex(*rng.uniform(-3, 3, 2))
        worst = max(worst, resolvent_identity_residual(f, spec, z1, z2))
    return _identity_outcome(eid, P, {"residual": worst}, {"residual": P["tol"]})


def run_polarization(eid, P):
    spec = _symbol(P)
    g = GridSpec(P["n"], P["L"], P["N"])
    rng = np.random.default_rng(P["seed"])
    b = homogeneous_power(spec.m - 1)
    worst = 0.0
    for _ in range(P["count"]):
        f, h = _random_field(rng, g), _random_field(rng, g)
        f, h = f * (1 / f.norm()), h * (1 / h.norm())
        z = complex(rng.uniform(-3, 3), rng.uniform(0.2, 2) * rng.choice([-1, 1]))
        worst = max(worst, polarization_check(b, f, h, spec, z))
    return _identity_outcome(eid, P, {"residual": worst}, {"residual": P["tol"]})


def run_pv_vanish(eid, P):
    m = P["m"]
    vals = [abs(pv_vanish(lam, P["eta"], P["quad_points"])) for lam in (1.0, 2.0**m)]
    control = abs(pv_vanish(1.0, P["eta"], P["quad_points"], symmetric=False))
    metrics = {"symmetric": max(vals), "asymmetric_control": control}
    passed = max(vals) <= P["tol"] and control > 1e3 * P["tol"]
    return Outcome(eid, P, passed, metrics, {"symmetric": P["tol"]})


def run_trace_resolvent(eid, P):
    spec = _symbol(P)
    g = GridSpec(P["n"], P["L"], P["N"])
    f = gaussian(g, center=np.r_[0.5, np.zeros(g.n - 1)])
    d = poisson_trace_residual(f, spec, P["lam"], P["eta"])
    metrics = {k: float(v) for k, v in d.items()}
    return _identity_outcome(eid, P, metrics, {"residual": P["tol"]})


# -- weighted inequalities ------------------------------------------------------------------


def _dilation_rows(eid, P, grid, ratio_fn, params):
    fam = FamilySpec(dilations=P["dilations"], scale_grids=True)
    rows = []
    for mem in make_family(fam, grid, tail_tol=P["tail_tol"]):
        r = ratio_fn(mem.field)
        rows.append(RatioReport(eid, mem.member_id, r, 1.0, params, grid_meta(mem.field.grid)))
    return rows


def _weighted_runner(kind):
    def run(eid, P):
        spec = _symbol(P)
        n = spec.n
        if kind == "sw":
            fn = lambda f: stein_weiss_ratio(f, spec, P["alpha"], P["beta"], P["gamma"])
            params = {"alpha": P["alpha"], "beta": P["beta"], "gamma": P["gamma"]}
        elif kind == "sw_special":
            fn = lambda f: stein_weiss_special_ratio(f, spec, P["beta"])
            params = {"beta": P["beta"]}
        elif kind == "l22":
            check_commutator_delta(n, P["delta"])
            q = riesz_symbol(P["component"])
            fn = lambda f: weight_commutator_ratio(f, P["delta"], q)
            params = {"delta": P["delta"], "q": q.name}
        else:
            check_kappa(n, P["kappa"])
            fn = lambda f: freq_commutator_ratio(f, spec, P["kappa"])
            params = {"kappa": P["kappa"]}
        params.update({"n": n, "symbol": spec.label()})
        gc, gf = _both_grids(P)
        coarse = _dilation_rows(eid, P, gc, fn, params)
        fine = _dilation_rows(eid, P, gf, fn, params)
        return _sweep_outcome(eid, P, coarse, fine, P["max_delta"])
    return run


def run_case3(eid, P):
    g = GridSpec(3, P["L"], P["N"])
    c, s = P["offset"], P["width"]
    f = spectral_gaussian(g, np.full(3, c * s / np.sqrt(3)), s)
    res = {}
    for label in P["symbols"].split(","):
        res[label] = case3_identity_residual(f, from_config(label.strip(), 3, 2.0, P["epsilon"]))
    metrics = {"residuals": res, "max_residual": max(res.values())}
    return _identity_outcome(eid, P, metrics, {"max_residual": P["tol"]})


def run_splitting(eid, P):
    g = GridSpec(P["n"], P["L"], P["N"])
    return _identity_outcome(eid, P, {"residual": splitting_residual(g, P["m"])}, {"residual": P["tol"]})


# -- hypothesis gating -----------------------------------------------------------------------


def gate_cases():
    """``(label, expected hypothesis, thunk)`` for calls that must be refused."""
    g2 = GridSpec(2, 8.0, 32)
    g3 = GridSpec(3, 8.0, 16)
    f2, f3 = gaussian(g2), gaussian(g3)
    q = riesz_symbol(0)
    quad = build_quad(euclid(2), 1.0, 32)
    return [
        ("TYPE-II smoothing, m=n", "1<m<n",
         lambda: smoothing_ratio(f2, euclid(2, 2.0), "II_homog", method="full")),
        ("TYPE-II smoothing, m>n", "1<m<n",
         lambda: smoothing_ratio(f2, euclid(2, 2.5), "II_duhamel", method="full")),
        ("TYPE-I smoothing, delta=1/2", "delta>1/2",
         lambda: smoothing_ratio(f2, euclid(2, 2.0), "I_homog", 0.5, method="full")),
        ("TYPE-II resolvent, m=n", "1<m<n",
         lambda: resolvent_sup_ratio([f2], euclid(2, 2.0), "T12_II", make_zeta_grid(4, 1, 0.1))),
        ("low-frequency trace, theta=(n-1)/2", "0<theta<(n-1)/2",
         lambda: lowfreq_slope(f2, euclid(2), [0.5, 0.25], 0.5)),
        ("low-frequency trace, theta>(n-1)/2", "0<theta<(n-1)/2",
         lambda: lowfreq_slope(f3, euclid(3), [0.5, 0.25], 1.2)),
        ("Hoelder, theta>1/2 (n=2)", "0<theta<=1/2 (n=2)",
         lambda: hoelder_ratio(f2, euclid(2), 1.0, 2.0, 0.6)),
        ("uniform trace, theta=0", "theta>0", lambda: trace_ratio(f2, quad, 0.0)),
        ("weight commutator, delta=1 (n=2)", "0<delta<1 (n=2)",
         lambda: weight_commutator_ratio(f2, 1.0, q)),
        ("weight commutator, delta>1 (n=3)", "0<delta<=1 (n>=3)",
         lambda: weight_commutator_ratio(f3, 1.2, q)),
        ("weight commutator, n=1", "n>=2",
         lambda: check_commutator_delta(1, 0.5)),
        ("frequency commutator, kappa=1 (n=2)", "0<kappa<1 (n=2)",
         lambda: freq_commutator_ratio(f2, euclid(2), 1.0)),
        ("frequency commutator, kappa=3/2 (n=3)", "0<kappa<3/2 (n>=3)",
         lambda: freq_commutator_ratio(f3, euclid(3), 1.5)),
        ("Stein-Weiss, alpha!=beta+gamma", "alpha=beta+gamma",
         lambda: stein_weiss_ratio(f2, euclid(2), 1.0, 0.5, 0.25)),
        ("Stein-Weiss special, beta=n/2", "0<=beta<n/2",
         lambda: stein_weiss_special_ratio(f2, euclid(2), 1.0)),
    ]


def run_gates(eid, P):
    results = {}
    for label, hyp, thunk in gate_cases():
        try:
            thunk()
            results[label] = "accepted"
        except UsageError as exc:
            results[label] = "ok" if exc.hypothesis == hyp and hyp in str(exc) else f"wrong: {exc}"
    bad = [k for k, v in results.items() if v != "ok"]
    return Outcome(eid, P, not bad, {"cases": results, "failures": bad}, {"failures": 0})


# -- the registry -----------------------------------------------------------------------------

_F, _I, _S, _B, _FS, _V = "float", "int", "str", "bool", "floats", "vectors"

_FAMILY = {"base": (_S, "gaussian"), "seed": (_I, 0)}
_SMOOTH = {"L": (_F, 16.0), "N": (_I, 128), "T": (_F, 12.0), "M": (_I, 480),
           "dilations": (_FS, (0.25, 0.5, 1.0, 2.0, 4.0)), "translations": (_V, ((0.5, 0.0),)),
           "method": (_S, "full"), "Q": (_I, 256), "sigma": (_F, 0.5),
           "negative_control": (_B, False), "max_delta": (_F, 0.05), **_FAMILY}
_RESOLV = {"L": (_F, 16.0), "N": (_I, 128), "dilations": (_FS, (0.5, 1.0, 2.0)),
           "translations": (_V, ((0.5, 0.0),)), "Lambda": (_F, 30.0), "eta_max": (_F, 1.0),
           "eta_min": (_F, 1e-5), "n_eta": (_I, 6), "n_bulk": (_I, 40), "negative_control": (_B, False),
           "refine": (_B, False), "max_delta": (_F, 0.1), "max_eta_delta": (_F, 0.02), **_FAMILY}
_TRACE = {"n": (_I, 2), "m": (_F, 2.0), "symbol": (_S, "euclid"), "L": (_F, 10.0), "N": (_I, 64),
          "resolution": (_I, 256), "translations": (_V, ((0.0, 0.0),)), **_FAMILY}
_WEIGHTED = {"n": (_I, 2), "m": (_F, 2.0), "symbol": (_S, "euclid"), "L": (_F, 16.0), "N": (_I, 128),
             "dilations": (_FS, tuple(2.0**k for k in range(-3, 4))), "tail_tol": (_F, 1e-12),
             "max_delta": (_F, 0.1)}
_RANDOM = {"n": (_I, 2), "m": (_F, 2.0), "symbol": (_S, "euclid"), "L": (_F, 8.0), "N": (_I, 32),
           "count": (_I, 20), "seed": (_I, 0), "tol": (_F, 1e-12)}

_ENTRIES = [
    Estimate("plancherel", "||F f|| = ||f||, (F f, F g) = (f, g), F^-1 F f = f on the lattice", "identity",
             {"n": (_I, 2), "L": (_F, 8.0), "N": (_I, 32), "count": (_I, 100), "seed": (_I, 0),
              "tol": (_F, 1e-12)}, run_plancherel),
    Estimate("gaussian-duality", "F e^{-|x|^2/2} = e^{-|xi|^2/2}; translation and modulation laws", "identity",
             {"n": (_I, 2), "L": (_F, 16.0), "N": (_I, 128), "shift": (_F, 1.0), "tol": (_F, 1e-10)},
             run_gaussian_duality),
    Estimate("propagator", "e^{isp} e^{itp} = e^{i(s+t)p}, ||e^{itp} f|| = ||f||, Gaussian Schroedinger flow",
             "identity",
             {"n": (_I, 2), "m": (_F, 2.0), "symbol": (_S, "euclid"), "L": (_F, 20.0), "N": (_I, 128),
              "seed": (_I, 0), "times": (_FS, (0.25, 0.5, 1.0)), "tol": (_F, 1e-12),
              "closed_form_tol": (_F, 1e-8)}, run_propagator),
    Estimate("duhamel-order", "(D_t - p(D)) (e^{itp} phi + i G f) = f, fourth order in the time step",
             "identity",
             {"n": (_I, 2), "m": (_F, 2.0), "symbol": (_S, "euclid"), "L": (_F, 12.0), "N": (_I, 64),
              "T": (_F, 2.0), "M": (_I, 40), "levels": (_I, 3), "sigma": (_F, 0.5), "min_order": (_F, 3.5)},
             run_duhamel_order),
    Estimate("kato-chain", "int |Q* F~(p(xi), xi)|^2 dxi = lim_{eta->0} (-1/pi) Im int form(tau + i eta) dtau",
             "identity",
             {"n": (_I, 1), "m": (_F, 2.0), "symbol": (_S, "euclid"), "L": (_F, 20.0), "N": (_I, 128),
              "T": (_F, 6.0), "M": (_I, 240), "etas": (_FS, (0.01, 0.005)), "tau_density": (_F, 4.0),
              "weight": (_F, 0.6), "deriv": (_F, 0.5), "velocity": (_F, 0.5), "check_density": (_B, False),
              "tol": (_F, 1e-3)}, run_kato_chain),
    Estimate("coarea", "int F dxi = int dtau int_{p = tau} F / |p'| dsigma", "identity",
             {"n": (_I, 2), "m": (_F, 2.0), "symbol": (_S, "euclid"), "epsilon": (_F, 0.0), "L": (_F, 8.0),
              "N": (_I, 128), "levels": (_V, ((32, 64), (64, 128), (128, 256))), "tol": (_F, 0.0)},
             run_coarea),
    Estimate("trace-closed-form", "||e^{-|xi|^2/2}||^2_{L2(|xi| = tau)} = 2 pi tau e^{-tau^2}", "identity",
             {"L": (_F, 16.0), "N": (_I, 128), "taus": (_FS, (0.5, 1.0, 2.0)), "resolution": (_I, 128),
              "tol": (_F, 1e-6)}, run_trace_closed_form),
    Estimate("L13-trace", "||f^||_{L2(Sigma(tau))} <= C ||<x>^{1/2+theta} f||, uniformly in tau", "inequality",
             {**_TRACE, "theta": (_F, 0.1), "tau_min": (_F, 0.1), "tau_max": (_F, 10.0), "tau_count": (_I, 9),
              "dilations": (_FS, (0.25, 0.5, 1.0, 2.0, 4.0)),
              "translations": (_V, ((0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (-0.3, 0.3), (0.25, -0.25))),
              "max_delta": (_F, 0.05)}, run_l13_trace),
    Estimate("L13-hoelder",
             "||tau^rho f^(tau .) - lam^rho f^(lam .)||_{L2(Sigma(1))} <= C |tau - lam|^theta ||<x>^{1/2+theta} f||",
             "inequality",
             {**_TRACE, "theta": (_F, 0.5), "levels": (_FS, (0.25, 0.5, 1.0, 2.0, 4.0)),
              "dilations": (_FS, (0.5, 1.0, 2.0)), "translations": (_V, ((0.0, 0.0), (0.5, 0.0))),
              "max_delta": (_F, 0.1)}, run_l13_hoelder),
    Estimate("L13-lowfreq", "||f^||_{L2(Sigma(tau))} <= C tau^theta ||<x>^{1/2+theta} f||, 0 < tau <= 1",
             "inequality",
             {**_TRACE, "theta": (_F, 0.25), "taus": (_FS, (0.2, 0.1, 0.05, 0.025)),
              "dilations": (_FS, (0.5, 1.0, 2.0)), "translations": (_V, ((0.0, 0.0), (0.5, 0.0))),
              "slope_tol": (_F, 0.05), "max_delta": (_F, 0.1)}, run_l13_lowfreq),
    Estimate("T11-I-homog", "||<x>^{-delta} |D|^{(m-1)/2} e^{itp} phi||_{L2(R^{1+n})} <= C ||phi||", "inequality",
             {"n": (_I, 2), "m": (_F, 2.0), "symbol": (_S, "euclid"), "delta": (_F, 0.6), **_SMOOTH},
             _smoothing_runner("I_homog")),
    Estimate("T11-I-duhamel", "||<x>^{-delta} |D|^{m-1} G f||_{L2(R^{1+n})} <= C ||<x>^{delta} f||",
             "inequality",
             {"n": (_I, 2), "m": (_F, 2.0), "symbol": (_S, "euclid"), "delta": (_F, 0.6), **_SMOOTH},
             _smoothing_runner("I_duhamel")),
    Estimate("T11-II-homog", "||<x>^{-m/2} <D>^{(m-1)/2} e^{itp} phi||_{L2(R^{1+n})} <= C ||phi||, 1<m<n",
             "inequality",
             {"n": (_I, 2), "m": (_F, 1.5), "symbol": (_S, "euclid"), **_SMOOTH},
             _smoothing_runner("II_homog")),
    Estimate("T11-II-duhamel", "||<x>^{-m/2} <D>^{m-1} G f||_{L2(R^{1+n})} <= C ||<x>^{m/2} f||, 1<m<n",
             "inequality",
             {"n": (_I, 2), "m": (_F, 1.5), "symbol": (_S, "euclid"), **_SMOOTH},
             _smoothing_runner("II_duhamel")),
    Estimate("T12-I", "sup_zeta |(|D|^{m-1} (zeta - p(D))^{-1} f, f)| <= C ||<x>^{delta} f||^2", "inequality",
             {"n": (_I, 2), "m": (_F, 2.0), "symbol": (_S, "euclid"), "delta": (_F, 0.6), **_RESOLV},
             _resolvent_runner("T12_I")),
    Estimate("T12-II", "sup_zeta |(<D>^{m-1} (zeta - p(D))^{-1} f, f)| <= C ||<x>^{m/2} f||^2, 1<m<n",
             "inequality",
             {"n": (_I, 2), "m": (_F, 1.5), "symbol": (_S, "euclid"), **_RESOLV},
             _resolvent_runner("T12_II")),
    Estimate("L51", "sup_zeta |((zeta - p(D))^{-1} f, f)| <= C ||<x>^{m/2} f||^2, 1<m<n", "inequality",
             {"n": (_I, 2), "m": (_F, 1.5), "symbol": (_S, "euclid"), **dict(_RESOLV, refine=(_B, True))},
             _resolvent_runner("L51")),
    Estimate("resolvent-identity", "R(z1) - R(z2) = (z2 - z1) R(z1) R(z2)", "identity", dict(_RANDOM),
             run_resolvent_identity),
    Estimate("polarization", "B(f, g) = (B(f+g) - B(f-g) + i B(f+ig) - i B(f-ig)) / 4", "identity",
             dict(_RANDOM), run_polarization),
    Estimate("pv-vanish", "int_{lam/2}^{3 lam/2} (lam - tau) / ((lam - tau)^2 + eta^2) dtau = 0", "identity",
             {"m": (_F, 2.0), "eta": (_F, 0.1), "quad_points": (_I, 64), "tol": (_F, 1e-14)}, run_pv_vanish),
    Estimate("trace-resolvent-consistency",
             "Im form(|xi|^{m-1}, f, f, lam + i eta) = -int P_eta(lam - tau) h(tau) dtau", "identity",
             {"n": (_I, 2), "m": (_F, 2.0), "symbol": (_S, "euclid"), "L": (_F, 32.0), "N": (_I, 256),
              "lam": (_F, 1.0), "eta": (_F, 0.3), "tol": (_F, 1e-3)}, run_trace_resolvent),
    Estimate("splitting", "b1(xi) + |xi|^{m-1} b2(xi) = <xi>^{m-1}", "identity",
             {"n": (_I, 2), "m": (_F, 1.5), "L": (_F, 16.0), "N": (_I, 128), "tol": (_F, 1e-14)},
             run_splitting),
    Estimate("T21-SW", "||a^{-beta} |D_xi|^{-alpha} f^|| <= C ||a^{gamma} f^||, alpha = beta + gamma",
             "inequality",
             {**_WEIGHTED, "alpha": (_F, 1.0), "beta": (_F, 0.5), "gamma": (_F, 0.5)}, _weighted_runner("sw")),
    Estimate("T21-SW-special", "||a^{-beta} f^|| <= C || |x|^beta f||, 0 <= beta < n/2", "inequality",
             {**_WEIGHTED, "beta": (_F, 0.5)}, _weighted_runner("sw_special")),
    Estimate("L22", "|| |x|^delta q(D) f - q(D) |x|^delta f|| <= C || |x|^delta f||, q of degree 0",
             "inequality", {**_WEIGHTED, "delta": (_F, 0.6), "component": (_I, 0)}, _weighted_runner("l22")),
    Estimate("L23", "||a^{-rho} r_kappa(D_xi) a^rho f^|| <= C || |x|^kappa f||", "inequality",
             {**_WEIGHTED, "kappa": (_F, 0.5)}, _weighted_runner("l23")),
    Estimate("L23-case3", "(a^{-rho} D_xi a^rho - D_xi) f^ = -i rho (a'/a) f^", "identity",
             {"L": (_F, 7.0), "N": (_I, 48), "offset": (_F, 7.0), "width": (_F, 1.0),
              "symbols": (_S, "euclid"), "epsilon": (_F, 0.3), "tol": (_F, 1e-8)}, run_case3),
    Estimate("hypothesis-gates", "out-of-range hypotheses are refused with a usage error", "identity", {},
             run_gates),
]

REGISTRY = {e.id: e for e in _ENTRIES}


def get(estimate_id: str) -> Estimate:
    try:
        return REGISTRY[estimate_id]
    except KeyError:
        raise ConfigError(f"unknown estimate id {estimate_id!r}; valid ids: {', '.join(REGISTRY)}") from None


def identity_ids():
    return [e.id for e in _ENTRIES if e.kind == "identity"]
