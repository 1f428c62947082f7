import numpy as np
import pytest
from hypothesis import given, strategies as st

from smoothlab.errors import DomainError, UsageError
from smoothlab.symbol import (SymbolSpec, bump, custom, euclid, eval_a, eval_grad_a, eval_p, from_config,
                              homogeneity_residual, lp4)

points = st.lists(st.floats(-5, 5), min_size=2, max_size=2).filter(lambda v: np.hypot(*v) > 1e-3)


def test_euclid_values():
    spec = euclid(2)
    assert eval_a(spec, [3.0, 4.0]) == pytest.approx(5.0)
    p, dp = eval_p(spec, [3.0, 4.0])
    assert p == pytest.approx(25.0)
    assert np.allclose(dp, [6.0, 8.0])


def test_lp4_and_bump_values():
    assert eval_a(lp4(2), [1.0, 1.0]) == pytest.approx(2 ** 0.25)
    assert eval_a(bump(2, 0.5), [2.0, 0.0]) == pytest.approx(3.0)
    assert eval_a(bump(2, 0.5), [0.0, 2.0]) == pytest.approx(2.0)


def test_origin():
    assert eval_a(euclid(3), np.zeros(3)) == 0.0
    with pytest.raises(DomainError):
        eval_grad_a(euclid(3), np.zeros(3))
    value, grad = eval_p(euclid(3), np.zeros(3))
    assert value == 0.0 and grad is None


def test_bad_arguments():
    with pytest.raises(UsageError):
        SymbolSpec(2, 2.0, "hexagon")
    with pytest.raises(UsageError, match="m>1"):
        euclid(2, 1.0)
    with pytest.raises(UsageError):
        bump(2, -1.5)
    with pytest.raises(UsageError):
        eval_a(euclid(2), [1.0, 2.0, 3.0])
    with pytest.raises(UsageError):
        from_config("custom", 2, 2.0)


def test_custom_profile_matches_builtin():
    # the l^4 profile supplied as a custom function, gradient by finite differences
    spec = custom(2, lambda w: np.sum(w**4, axis=-1) ** 0.25)
    xi = np.array([[0.3, -1.2], [2.0, 0.5]])
    assert np.allclose(spec.a(xi), lp4(2).a(xi), atol=1e-14)
    assert np.allclose(spec.grad_a(xi), lp4(2).grad_a(xi), atol=1e-8)


@pytest.mark.parametrize("spec", [euclid(2), lp4(2), bump(2, 0.3), euclid(3), lp4(3), bump(3, -0.4)],
                         ids=lambda s: f"{s.label()}-n{s.n}")
def test_homogeneity_residual(spec):
    res = homogeneity_residual(spec, 500, seed=3)
    print(spec.label(), spec.n, res)
    assert res < 1e-12


@given(points, st.floats(0.01, 100))
def test_degree_one_homogeneity(v, t):
    xi = np.array(v)
    for spec in (euclid(2), lp4(2), bump(2, 0.7)):
        assert spec.a(t * xi) == pytest.approx(t * spec.a(xi), rel=1e-12)
        assert np.allclose(spec.grad_a(t * xi), spec.grad_a(xi), rtol=1e-10, atol=1e-12)


@given(points, st.floats(1.1, 4.0))
def test_grad_p_matches_finite_difference(v, m):
    spec = lp4(2, m)
    xi = np.array(v)
    h = 1e-6 * max(1.0, np.linalg.norm(xi))
    fd = [(spec.p(xi + h * e) - spec.p(xi - h * e)) / (2 * h) for e in np.eye(2)]
    assert np.allclose(spec.grad_p(xi), fd, rtol=1e-5, atol=1e-6 * spec.p(xi) / np.linalg.norm(xi))
