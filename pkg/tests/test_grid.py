import numpy as np
import pytest
from hypothesis import given, strategies as st

from smoothlab.errors import UsageError
from smoothlab.grid import (FREQUENCY, PHYSICAL, Field, GridSpec, forward_ft, gaussian, inverse_ft, nuft_eval,
                            power_weight, transform_frames, weighted_norm)


def random_field(rng, grid, space=PHYSICAL):
    return Field(grid, space, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))


def test_lattice_geometry():
    g = GridSpec(2, 4.0, 16)
    assert g.dx == pytest.approx(0.5)
    assert g.dxi == pytest.approx(np.pi / 4)
    assert g.x_axis[0] == -4.0 and g.x_axis[-1] == pytest.approx(3.5)
    assert g.xi_axis[g.N // 2] == 0.0
    assert np.all(g.x[g.origin_index] == 0)
    assert g.refined().N == 32 and g.scaled(0.5).L == 2.0


def test_grid_validation():
    with pytest.raises(UsageError):
        GridSpec(4, 1.0, 8)
    with pytest.raises(UsageError):
        GridSpec(2, 1.0, 7)
    with pytest.raises(UsageError):
        GridSpec(3, 1.0, 512)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gaussian_is_self_dual(n):
    g = GridSpec(n, 8.0, 64 if n < 3 else 48)
    F = forward_ft(gaussian(g))
    err = np.max(np.abs(F.values - np.exp(-np.sum(g.xi**2, axis=-1) / 2)))
    print("self-duality error", n, err)
    assert err < 1e-10


def test_translation_and_modulation_laws():
    g = GridSpec(2, 16.0, 128)
    x0, k0 = np.array([1.5, -0.5]), np.array([0.75, 2.0])
    F = forward_ft(gaussian(g, center=x0, modulation=k0)).values
    xi = g.xi
    exact = np.exp(-1j * (xi - k0) @ x0) * np.exp(-np.sum((xi - k0) ** 2, axis=-1) / 2)
    assert np.max(np.abs(F - exact)) < 1e-10


@given(st.integers(0, 10_000), st.sampled_from([1, 2, 3]))
def test_plancherel_and_roundtrip(seed, n):
    rng = np.random.default_rng(seed)
    g = GridSpec(n, 3.0, 8 if n == 3 else 16)
    f, h = random_field(rng, g), random_field(rng, g)
    F, H = forward_ft(f), forward_ft(h)
    assert F.norm() == pytest.approx(f.norm(), rel=1e-12)
    assert abs(F.inner(H) - f.inner(h)) <= 1e-12 * f.norm() * h.norm()
    assert np.allclose(inverse_ft(F).values, f.values, atol=1e-12 * np.abs(f.values).max())


def test_space_tags_are_enforced(rng):
    g = GridSpec(1, 4.0, 16)
    f = random_field(rng, g)
    with pytest.raises(UsageError):
        inverse_ft(f)
    with pytest.raises(UsageError):
        forward_ft(forward_ft(f))
    with pytest.raises(UsageError):
        f + forward_ft(f)


def test_nuft_matches_fft_on_lattice(rng):
    g = GridSpec(2, 5.0, 16)
    f = gaussian(g, width=1.3, modulation=[0.4, -0.2])
    F = forward_ft(f).values.reshape(-1)
    pts = g.xi.reshape(-1, 2)
    idx = rng.choice(len(pts), 40, replace=False)
    assert np.allclose(nuft_eval(f, pts[idx]), F[idx], atol=1e-13)


def test_nuft_off_lattice_gaussian():
    g = GridSpec(3, 8.0, 32)
    f = gaussian(g)
    pts = np.array([[0.3, 0.1, -0.7], [1.1, 1.9, 0.2]])
    assert np.allclose(nuft_eval(f, pts), np.exp(-np.sum(pts**2, axis=-1) / 2), atol=1e-12)


def test_transform_frames_matches_single_transforms(rng):
    g = GridSpec(2, 4.0, 16)
    frames = rng.standard_normal((3,) + g.shape) + 0j
    out = transform_frames(frames, g)
    for k in range(3):
        assert np.allclose(out[k], forward_ft(Field(g, PHYSICAL, frames[k])).values)
    assert np.allclose(transform_frames(out, g, inverse=True), frames)


def test_weighted_norms():
    g = GridSpec(2, 12.0, 96)
    f = gaussian(g)
    # ||<x> f||^2 = int (1 + r^2) e^{-r^2} = pi + pi
    assert weighted_norm(f, 1.0) ** 2 == pytest.approx(2 * np.pi, rel=1e-12)
    assert weighted_norm(f, 1.0, "pure_power") ** 2 == pytest.approx(np.pi, rel=1e-12)
    assert power_weight(g, 0.5)[g.origin_index] == 0.0
    with pytest.raises(UsageError):
        weighted_norm(f, 1.0, "exponential")


def test_binary_container_roundtrip(tmp_path, rng):
    f = forward_ft(random_field(rng, GridSpec(2, 3.0, 8)))
    path = tmp_path / "f.bin"
    f.save(path)
    g = Field.load(path)
    assert g.space == FREQUENCY and g.grid == f.grid
    assert np.array_equal(g.values, f.values)
    assert f.to_bytes() == g.to_bytes()
