import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from smoothlab.errors import DomainError, UsageError
from smoothlab.grid import FREQUENCY, Field, GridSpec, gaussian, nuft_eval
from smoothlab.symbol import bump, euclid, lp4
from smoothlab.trace import (build_quad, coarea_residual, hoelder_difference, hoelder_ratio, lowfreq_slope,
                             trace_norm, trace_ratio)

G = GridSpec(2, 16.0, 128)
GAUSS = gaussian(G)


def test_circle_lengths():
    assert build_quad(euclid(2), 1.0, 64).area == pytest.approx(2 * np.pi, rel=1e-12)
    assert build_quad(euclid(2), 3.0, 64).area == pytest.approx(6 * np.pi, rel=1e-12)
    assert build_quad(euclid(3), 2.0, 24).area == pytest.approx(16 * np.pi, rel=1e-12)


def test_lp4_length_against_fine_rule():
    coarse = build_quad(lp4(2), 1.0, 256).area
    fine = build_quad(lp4(2), 1.0, 2560).area
    print("l4 circle length", coarse, fine)
    assert coarse == pytest.approx(fine, rel=1e-8)


@pytest.mark.parametrize("spec", [euclid(2), lp4(2), bump(2, 0.4), lp4(3), bump(3, -0.3)],
                         ids=lambda s: f"{s.label()}-n{s.n}")
def test_nodes_on_level_set(spec):
    q = build_quad(spec, 2.5, 32)
    assert np.max(np.abs(spec.a(q.nodes) - 2.5)) <= 1e-12 * 2.5


@given(st.floats(0.05, 20))
def test_area_scaling(tau):
    for spec in (lp4(2), bump(3, 0.2)):
        base = build_quad(spec, 1.0, 32).area
        assert build_quad(spec, tau, 32).area == pytest.approx(tau ** (spec.n - 1) * base, rel=1e-12)


def test_bad_level():
    with pytest.raises(UsageError):
        build_quad(euclid(2), 0.0, 32)
    with pytest.raises(UsageError):
        build_quad(euclid(2), 1.0, 4)


@pytest.mark.parametrize("tau", [0.5, 1.0, 2.0])
def test_trace_closed_form(tau):
    val = trace_norm(GAUSS, build_quad(euclid(2), tau, 128)) ** 2
    assert val == pytest.approx(2 * np.pi * tau * np.exp(-tau * tau), rel=1e-6)
    if tau == 1.0:
        assert np.sqrt(val) == pytest.approx(1.5203, abs=1e-4)


def test_trace_of_zero_field():
    assert trace_norm(GAUSS * 0, build_quad(euclid(2), 1.0, 32)) == 0.0


def test_dilation_covariance():
    f = gaussian(G, center=[0.7, -0.2], modulation=[0.3, 0.1])
    spec = lp4(2)
    base = build_quad(spec, 1.0, 128)
    for tau in (0.3, 1.7):
        direct = trace_norm(f, build_quad(spec, tau, 128))
        scaled = tau ** 0.5 * np.sqrt(np.sum(base.weights * np.abs(nuft_eval(f, tau * base.nodes)) ** 2))
        assert direct == pytest.approx(scaled, rel=1e-10)


def test_node_doubling():
    f = gaussian(G, center=[0.7, -0.2])
    a = trace_norm(f, build_quad(lp4(2), 1.3, 128))
    b = trace_norm(f, build_quad(lp4(2), 1.3, 256))
    assert a == pytest.approx(b, rel=1e-8)


def test_out_of_band_levels_are_refused():
    g = GridSpec(2, 8.0, 16)
    with pytest.raises(DomainError, match="Nyquist"):
        trace_norm(gaussian(g), build_quad(euclid(2), 10.0, 32))


def test_hoelder_radial_oracle():
    # radial f and the round symbol: the difference is constant on the unit circle
    f = GAUSS
    tau, lam, theta = 0.7, 1.9, 0.5
    fh = lambda r: np.exp(-r * r / 2)
    expected = abs(tau**0.5 * fh(tau) - lam**0.5 * fh(lam)) * np.sqrt(2 * np.pi)
    assert hoelder_difference(f, euclid(2), tau, lam, 128) == pytest.approx(expected, rel=1e-10)
    from smoothlab.grid import weighted_norm
    rhs = weighted_norm(f, 0.5 + theta)
    assert hoelder_ratio(f, euclid(2), tau, lam, theta, 128) == pytest.approx(
        expected / (abs(tau - lam) ** theta * rhs), rel=1e-10)


def test_hoelder_gates():
    with pytest.raises(UsageError):
        hoelder_ratio(GAUSS, euclid(2), 1.0, 1.0, 0.5)
    with pytest.raises(UsageError, match="0<theta<=1/2"):
        hoelder_ratio(GAUSS, euclid(2), 1.0, 2.0, 0.7)


def test_lowfreq_slope_and_gate():
    slope, ratios = lowfreq_slope(GAUSS, euclid(2), [0.2, 0.1, 0.05, 0.025], 0.25)
    print("slope", slope, "ratios", ratios)
    assert abs(slope - 0.5) <= 0.05
    assert max(ratios) < 10
    with pytest.raises(UsageError, match=r"0<theta<\(n-1\)/2"):
        lowfreq_slope(GAUSS, euclid(2), [0.2, 0.1], 0.5)


def test_uniform_trace_gate():
    with pytest.raises(UsageError, match="theta>0"):
        trace_ratio(GAUSS, build_quad(euclid(2), 1.0, 32), 0.0)


def test_coarea():
    g = GridSpec(2, 8.0, 128)
    F = Field(g, FREQUENCY, np.exp(-np.sum(g.xi**2, axis=-1)).astype(complex))
    assert coarea_residual(F, euclid(2), 128, 256) <= 1e-6
    res = [coarea_residual(F, lp4(2), tq, sr) for tq, sr in ((32, 64), (64, 128), (128, 256))]
    print("lp4 co-area residuals", res)
    assert res[-1] <= 1e-4 and res[-1] < res[0]
    assert coarea_residual(F * 0, euclid(2)) == 0.0


def test_quad_csv_export(tmp_path):
    q = build_quad(lp4(2), 1.0, 16)
    path = tmp_path / "quad.csv"
    q.to_csv(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 17
    assert sum(float(r[-1]) for r in rows[1:]) == pytest.approx(q.area, rel=1e-12)
