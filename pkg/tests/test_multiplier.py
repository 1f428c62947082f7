import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import gamma, hyp1f1

from smoothlab.errors import UsageError
from smoothlab.grid import FREQUENCY, GridSpec, forward_ft, gaussian, power_weight
from smoothlab.harness.family import spectral_gaussian
from smoothlab.multiplier import (apply_multiplier, bracket_power, case3_identity_residual, chi_cutoff,
                                  conjugated_ratio, degree_zero, freq_commutator_ratio, homogeneous_power,
                                  power_weighted_ft, riesz_symbol, scalar_function, splitting_residual,
                                  splitting_symbols, stein_weiss_ratio, stein_weiss_special_ratio, symbol_power,
                                  weight_commutator_apply, weight_commutator_ratio)
from smoothlab.symbol import bump, euclid, lp4

G2 = GridSpec(2, 16.0, 128)


def test_bracket_power_is_one_minus_laplacian():
    f = gaussian(G2)
    r2 = np.sum(G2.x**2, axis=-1)
    out = apply_multiplier(f, bracket_power(2))
    err = np.max(np.abs(out.values - (3 - r2) * np.exp(-r2 / 2)))
    print("(1 - Laplacian) Gaussian error", err)
    assert err < 1e-12


def test_identity_and_composition():
    f = gaussian(G2, center=[0.5, 0.0], modulation=[0.0, 1.0])
    assert np.allclose(apply_multiplier(f, homogeneous_power(0)).values, f.values, atol=1e-14)
    a = apply_multiplier(apply_multiplier(f, homogeneous_power(0.3)), homogeneous_power(0.7))
    b = apply_multiplier(f, homogeneous_power(1.0))
    assert np.allclose(a.values, b.values, atol=1e-12)


def test_frequency_input_stays_in_frequency_space():
    F = forward_ft(gaussian(G2))
    out = apply_multiplier(F, symbol_power(lp4(2), 1.0))
    assert out.space == FREQUENCY
    assert np.allclose(out.values, lp4(2).a(G2.xi) * F.values)


def test_zero_mode_bookkeeping():
    f = gaussian(G2)
    q = riesz_symbol(0)
    assert q.singular_at_zero
    assert apply_multiplier(forward_ft(f), q).values[G2.origin_index] == 0
    one = degree_zero(lambda xi: np.ones(xi.shape[:-1]))
    assert not one.singular_at_zero
    # a constant degree-zero multiplier commutes with every weight
    c = weight_commutator_apply(f, 0.6, one)
    assert np.max(np.abs(c.values)) < 1e-14


def test_chi_cutoff_profile():
    r = np.linspace(0, 3, 301)
    xi = np.stack([r, np.zeros_like(r)], -1)
    chi = chi_cutoff(xi)
    assert np.all(chi[r <= 1] == 1.0) and np.all(chi[r >= 2] == 0.0)
    assert np.all(np.diff(chi) <= 1e-15)
    # smooth: second differences stay small across both junctions
    assert np.max(np.abs(np.diff(chi, 2))) < 1e-3


@given(st.floats(1.05, 3.0))
def test_splitting_identity(m):
    assert splitting_residual(GridSpec(2, 4.0, 32), m) <= 1e-14


def test_splitting_symbols_are_bounded_pieces():
    b1, b2 = splitting_symbols(1.5)
    xi = G2.xi
    assert np.all(b1(xi)[np.linalg.norm(xi, axis=-1) >= 2] == 0)
    assert np.all(np.isfinite(b2(xi)))


def test_conjugated_ratio_bounded():
    b1, _ = splitting_symbols(1.5)
    vals = [conjugated_ratio(gaussian(G2, center=[c, 0.0]), scalar_function(b1, "b1"), 0.75)
            for c in (0.0, 2.0, 4.0)]
    print("conjugated ratios", vals)
    assert max(vals) < 10


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_power_weighted_transform_oracle(alpha):
    # transform of |x|^-alpha exp(-|x|^2/2) in R^2, closed form via Kummer's function.
    # After the first-order subtraction the remainder has a |x|^(2-alpha) kink at 0,
    # so the lattice error is O(dx^(4-alpha)).
    k = (2 - alpha) / 2
    errs = []
    for N in (128, 256):
        g = GridSpec(2, 12.0, N)
        F = power_weighted_ft(gaussian(g), alpha).values
        exact = 2 ** (-alpha / 2) * gamma(k) * hyp1f1(k, 1, -np.sum(g.xi**2, axis=-1) / 2)
        errs.append(np.max(np.abs(F - exact)))
    order = np.log2(errs[0] / errs[1])
    print("alpha", alpha, "errors", errs, "order", order)
    assert abs(order - (4 - alpha)) < 0.1
    assert errs[1] < 1e-4


def test_stein_weiss_trivial_cases():
    f = gaussian(G2, center=[0.3, -0.2])
    assert stein_weiss_ratio(f, euclid(2), 0, 0, 0) == pytest.approx(1.0, rel=1e-12)
    assert stein_weiss_special_ratio(f, euclid(2), 0.0) == pytest.approx(1.0, rel=1e-12)


def test_stein_weiss_special_dilation_invariance():
    # both sides scale like lambda^-beta, so the ratio is the same for every dilate
    vals = []
    for lam in (0.5, 1.0, 2.0):
        g = G2.scaled(1 / lam)
        f = gaussian(g, width=1 / lam)
        vals.append(stein_weiss_special_ratio(f, euclid(2), 0.5))
    print("special ratios", vals)
    assert np.ptp(vals) < 1e-3 * vals[0]


def test_weight_commutator_riesz():
    f = gaussian(G2, center=[1.0, 0.0])
    r = weight_commutator_ratio(f, 0.6, riesz_symbol(1))
    assert 0 < r < 5
    with pytest.raises(UsageError, match="0<delta<1"):
        weight_commutator_ratio(f, 1.0, riesz_symbol(1))


def test_freq_commutator_and_gate():
    f = gaussian(G2, center=[0.5, 0.5])
    r = freq_commutator_ratio(f, lp4(2), 0.5)
    assert np.isfinite(r) and r > 0
    with pytest.raises(UsageError, match="0<kappa<1"):
        freq_commutator_ratio(f, lp4(2), 1.0)


@pytest.mark.parametrize("spec", [euclid(3), bump(3, 0.3)], ids=lambda s: s.label())
def test_case3_identity_small_grid(spec):
    g = GridSpec(3, 7.0, 48)
    f = spectral_gaussian(g, np.full(3, 7.0 / np.sqrt(3)))
    res = case3_identity_residual(f, spec)
    print(spec.label(), res)
    assert res < 1e-8


def test_power_weight_origin():
    assert power_weight(G2, 0.0)[G2.origin_index] == 1.0
    assert power_weight(G2, 1.0)[G2.origin_index] == 0.0
