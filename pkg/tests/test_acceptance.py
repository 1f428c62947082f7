"""Acceptance suite: one test per criterion (criterion 11 split by case).

Every test runs the registry entry that the CLI would run, with the criterion's
parameters stated explicitly, and prints a ``PASS/FAIL criterion k`` line.
"""
import time

import pytest

from smoothlab.harness import get

pytestmark = pytest.mark.slow


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def run(criterion, label, estimate_id, overrides=None, keys=None):
    """Run one registry entry, print its verdict line, and return the outcome."""
    t0 = time.perf_counter()
    out = get(estimate_id).run(overrides or {})
    elapsed = time.perf_counter() - t0
    shown = {k: out.metrics[k] for k in (keys or out.metrics) if k in out.metrics}
    detail = " ".join(f"{k}={_fmt(v)}" for k, v in shown.items())
    print(f"{'PASS' if out.passed else 'FAIL'} criterion {criterion}: {label} [{estimate_id}] {detail} "
          f"({elapsed:.1f}s)")
    assert out.passed, (out.metrics, out.thresholds)
    return out


# 1 ---------------------------------------------------------------------------------


@pytest.mark.parametrize("n,N", [(1, 256), (2, 32), (3, 16)])
def test_criterion_01_plancherel(n, N):
    run(1, f"Plancherel, Parseval, round trip n={n}", "plancherel",
        {"n": n, "N": N, "count": 100, "tol": 1e-12})


# 2 ---------------------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2])
def test_criterion_02_gaussian_duality(n):
    run(2, f"Gaussian self-duality and translation/modulation n={n}", "gaussian-duality",
        {"n": n, "L": 16, "N": 128, "tol": 1e-10})


# 3 ---------------------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2])
def test_criterion_03_propagator(n):
    out = run(3, f"propagator unitarity, group law, Gaussian flow n={n}", "propagator",
              {"n": n, "m": 2, "symbol": "euclid", "tol": 1e-12, "closed_form_tol": 1e-8})
    assert "closed_form" in out.metrics


# 4 ---------------------------------------------------------------------------------


def test_criterion_04_duhamel_order():
    out = run(4, "Duhamel residual order under step halving", "duhamel-order",
              {"n": 2, "m": 2, "min_order": 3.5}, keys=["orders", "exact_orders", "equation_residual"])
    assert out.metrics["order"] >= 3.5


# 5 ---------------------------------------------------------------------------------


def test_criterion_05_kato_chain():
    run(5, "space-time norm vs limiting-absorption integral (n=1, m=2)", "kato-chain",
        {"n": 1, "m": 2, "tol": 1e-3}, keys=["A", "B_extrap", "residual"])


# 6 ---------------------------------------------------------------------------------


@pytest.mark.parametrize("symbol,tol", [("euclid", 1e-6), ("lp4", 1e-4)])
def test_criterion_06_coarea(symbol, tol):
    run(6, f"co-area identity {symbol}", "coarea", {"symbol": symbol, "tol": tol},
        keys=["residuals", "improving"])


# 7 ---------------------------------------------------------------------------------


def test_criterion_07_trace_closed_form():
    run(7, "Gaussian trace closed form, tau in {0.5, 1, 2}", "trace-closed-form",
        {"taus": "0.5,1,2", "tol": 1e-6}, keys=["errors"])


# 8 ---------------------------------------------------------------------------------


def test_criterion_08_uniform_trace():
    out = run(8, "uniform trace ratio, tau in [0.1, 10], 25 members, theta=0.1", "L13-trace",
              {"n": 2, "theta": 0.1, "tau_min": 0.1, "tau_max": 10, "max_delta": 0.05},
              keys=["sup_ratio", "refinement_delta", "all_finite"])
    members = {r.member_id.rsplit(";tau=", 1)[0] for r in out.rows}
    assert len(members) == 25


# 9 ---------------------------------------------------------------------------------


def test_criterion_09_hoelder():
    out = run(9, "Hoelder difference over all ordered pairs, theta=0.5, n=2", "L13-hoelder",
              {"n": 2, "theta": 0.5, "levels": "0.25,0.5,1,2,4", "max_delta": 0.1},
              keys=["pairs", "sup_ratio", "refinement_delta", "all_finite"])
    assert out.metrics["pairs"] == 20


# 10 --------------------------------------------------------------------------------


def test_criterion_10_lowfreq():
    out = run(10, "low-frequency slope 0.5 +/- 0.05 and theta=0.25 ratios", "L13-lowfreq",
              {"n": 2, "theta": 0.25, "slope_tol": 0.05, "max_delta": 0.1},
              keys=["slope", "sup_ratio", "refinement_delta"])
    assert abs(out.metrics["slope"] - 0.5) <= 0.05


# 11 --------------------------------------------------------------------------------

_TYPE_I = {"n": 2, "m": 2, "delta": 0.6, "symbol": "euclid", "max_delta": 0.05}
_TYPE_II = {"n": 2, "m": 1.5, "max_delta": 0.05}
_SWEEP_KEYS = ["sup_ratio", "refinement_delta", "all_finite"]


@pytest.mark.parametrize("eid", ["T11-I-homog", "T11-I-duhamel"])
def test_criterion_11_type1(eid):
    run(11, "TYPE-I smoothing n=2 m=2 delta=0.6 euclid", eid, _TYPE_I, keys=_SWEEP_KEYS)


@pytest.mark.parametrize("eid", ["T11-II-homog", "T11-II-duhamel"])
@pytest.mark.parametrize("symbol", ["euclid", "lp4"])
def test_criterion_11_type2(eid, symbol):
    run(11, f"TYPE-II smoothing n=2 m=1.5 {symbol}", eid, dict(_TYPE_II, symbol=symbol), keys=_SWEEP_KEYS)


# 12 --------------------------------------------------------------------------------

_RES_KEYS = ["sup_ratio", "eta_floor_delta", "all_finite"]


def test_criterion_12_type1_resolvent():
    run(12, "TYPE-I resolvent sup, eta-floor halving", "T12-I",
        {"n": 2, "m": 2, "delta": 0.6, "symbol": "euclid", "max_eta_delta": 0.02}, keys=_RES_KEYS)


@pytest.mark.parametrize("symbol", ["euclid", "lp4"])
def test_criterion_12_type2_resolvent(symbol):
    run(12, f"TYPE-II resolvent sup, eta-floor halving {symbol}", "T12-II",
        {"n": 2, "m": 1.5, "symbol": symbol, "max_eta_delta": 0.02}, keys=_RES_KEYS)


def test_criterion_12_identities():
    run(12, "first resolvent identity", "resolvent-identity", {"tol": 1e-12})
    run(12, "polarization identity", "polarization", {"tol": 1e-12})
    run(12, "principal-value cancellation", "pv-vanish", {"tol": 1e-14})


# 13 --------------------------------------------------------------------------------

_W = {"n": 2, "max_delta": 0.1}


@pytest.mark.parametrize("eid,extra", [
    ("T21-SW", {"alpha": 1.0, "beta": 0.5, "gamma": 0.5}),
    ("T21-SW-special", {"beta": 0.5}),
    ("L22", {"delta": 0.6}),
    ("L23", {"kappa": 0.5}),
])
def test_criterion_13_weighted(eid, extra):
    out = run(13, "ratio bounded over 7 dilations", eid, {**_W, **extra},
              keys=["sup_ratio", "refinement_delta", "all_finite"])
    assert len(out.rows) == 14


def test_criterion_13_case3():
    run(13, "Case-3 exact identity kappa=1, n=3, N=48", "L23-case3", {"N": 48, "tol": 1e-8},
        keys=["max_residual"])


# 14 --------------------------------------------------------------------------------


def test_criterion_14_hypothesis_gates():
    out = run(14, "out-of-range hypotheses raise usage errors naming them", "hypothesis-gates",
              keys=["failures"])
    for label, verdict in out.metrics["cases"].items():
        print(f"  {label}: {verdict}")
