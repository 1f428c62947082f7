"""Test-function families: dilations, translations and modulations of a base profile."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite as H

from ..errors import ConfigError
from ..grid import FREQUENCY, PHYSICAL, Field, GridSpec, forward_ft

TAIL_TOL = 1e-12
BASES = ("gaussian", "hermite", "random_bandlimited")


@dataclass(frozen=True)
class FamilySpec:
    """``lambda^{n/2} base(lambda (x - x0)) e^{i xi0.x}`` over all parameter combinations.

    ``scale_grids`` gives each member the grid ``L / lambda`` (same ``N``), so every
    dilation is resolved equally well.
    """

    base: str = "gaussian"
    dilations: tuple = (1.0,)
    translations: tuple = ()
    modulations: tuple = ()
    order: int = 0
    seed: int = 0
    scale_grids: bool = False

    def __post_init__(self):
        if self.base not in BASES:
            raise ConfigError(f"unknown family base {self.base!r}; expected one of {BASES}")
        if not self.dilations or min(self.dilations) <= 0:
            raise ConfigError("dilations must be positive")


@dataclass(frozen=True, eq=False)
class Member:
    member_id: str
    field: Field
    dilation: float
    translation: tuple = ()
    modulation: tuple = ()


def base_profile(spec: FamilySpec, x: np.ndarray) -> np.ndarray:
    """Unnormalized base function at points ``x`` (trailing axis ``n``)."""
    r2 = np.sum(x**2, axis=-1)
    if spec.base == "gaussian":
        return np.exp(-r2 / 2).astype(complex)
    if spec.base == "hermite":
        c = np.zeros(spec.order + 1)
        c[-1] = 1.0
        return (H.hermval(x[..., 0], c) * np.exp(-r2 / 2)).astype(complex)
    rng = np.random.default_rng(spec.seed)
    n = x.shape[-1]
    out = np.zeros(x.shape[:-1], dtype=complex)
    for _ in range(8):
        y = rng.uniform(-1, 1, n)
        k = rng.uniform(-1, 1, n)
        c = rng.standard_normal() + 1j * rng.standard_normal()
        out += c * np.exp(-np.sum((x - y) ** 2, axis=-1) / 2 + 1j * (x @ k))
    return out


def _tail(values: np.ndarray, n: int) -> float:
    """Largest magnitude on the outermost lattice shell, relative to the maximum."""
    peak = np.abs(values).max()
    edge = 0.0
    for d in range(n):
        edge = max(edge, np.abs(np.take(values, [0, -1], axis=d)).max())
    return float(edge / peak)


def _widened(g: GridSpec, min_nyquist) -> GridSpec:
    """``g`` with more points per axis (same ``L``) until its Nyquist frequency reaches ``min_nyquist``."""
    if min_nyquist is None or g.nyquist >= min_nyquist:
        return g
    N = int(np.ceil(2 * g.L * min_nyquist / np.pi))
    return GridSpec(g.n, g.L, N + N % 2)


def make_family(spec: FamilySpec, grid: GridSpec, tail_tol: float = TAIL_TOL, min_nyquist: float = None):
    """Normalized members in deterministic order (dilation, translation, modulation).

    ``min_nyquist`` raises a member's point count when its grid would not reach
    that frequency (needed when evaluating ``f^`` on fixed level sets).
    """
    n = grid.n
    trans = [tuple(map(float, t)) for t in spec.translations] or [(0.0,) * n]
    mods = [tuple(map(float, k)) for k in spec.modulations] or [(0.0,) * n]
    for v in trans + mods:
        if len(v) != n:
            raise ConfigError(f"shift {v} does not have dimension {n}")
    members = []
    for lam, x0, k0 in itertools.product(spec.dilations, trans, mods):
        g = _widened(grid.scaled(1.0 / lam) if spec.scale_grids else grid, min_nyquist)
        mid = f"lam={lam:g};x0={','.join(f'{v:g}' for v in x0)};xi0={','.join(f'{v:g}' for v in k0)}"
        if np.linalg.norm(k0) > 0.5 * g.nyquist:
            raise ConfigError(f"member {mid}: modulation beyond half the Nyquist frequency {g.nyquist:.3g}")
        x = g.x
        vals = lam ** (n / 2) * base_profile(spec, lam * (x - np.asarray(x0))) * np.exp(1j * (x @ np.asarray(k0)))
        f = Field(g, PHYSICAL, vals)
        if f.is_zero():
            raise ConfigError(f"member {mid} vanishes on the grid")
        f = f * (1.0 / f.norm())
        if _tail(f.values, n) > tail_tol:
            raise ConfigError(f"member {mid}: boundary tail {_tail(f.values, n):.2e} exceeds {tail_tol:g}; "
                              f"use a larger L")
        spec_tail = _tail(forward_ft(f).values, n)
        if spec_tail > tail_tol:
            raise ConfigError(f"member {mid}: spectrum reaches the Nyquist edge ({spec_tail:.2e}); "
                              f"use a larger N")
        members.append(Member(mid, f, float(lam), x0, k0))
    return members


def spectral_gaussian(grid: GridSpec, center, width: float = 1.0) -> Field:
    """The physical field whose transform is ``exp(-|xi - center|^2 / (2 width^2))``."""
    from ..grid import inverse_ft
    xi = grid.xi
    F = np.exp(-np.sum((xi - np.asarray(center, float)) ** 2, axis=-1) / (2 * width**2)).astype(complex)
    return inverse_ft(Field(grid, FREQUENCY, F))
