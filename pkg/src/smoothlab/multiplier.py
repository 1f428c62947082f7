"""Fourier multipliers, power weights, and the weighted commutator ratios.

On the frequency side ``D_xi`` acting on ``f^`` is multiplication of ``f`` by
``-x``; every ``|D_xi|``-type operator below is realized that way.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gamma, hyp1f1

from .errors import NumericError, UsageError, require
from .grid import FREQUENCY, PHYSICAL, Field, forward_ft, inverse_ft, power_weight
from .symbol import SymbolSpec


@dataclass(frozen=True)
class MultiplierKind:
    """A symbol ``sigma(xi)`` on the frequency lattice.

    ``singular_at_zero`` marks symbols whose value at ``xi = 0`` is set to 0
    (negative powers, non-constant degree-zero symbols).
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    singular_at_zero: bool = False
    params: tuple = ()

    def on_lattice(self, xi: np.ndarray) -> np.ndarray:
        """Evaluate on a lattice of points, applying the zero-mode rule."""
        r = np.linalg.norm(xi, axis=-1)
        zero = r == 0
        if self.singular_at_zero and np.any(zero):
            safe = np.where(zero[..., None], 1.0, xi)
            with np.errstate(divide="ignore", invalid="ignore"):
                s = np.asarray(self.fn(safe), dtype=complex)
            s = np.where(zero, 0.0, s)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                s = np.asarray(self.fn(xi), dtype=complex)
        if not np.all(np.isfinite(s[~zero])):
            raise NumericError(f"multiplier {self.name} is not finite on the lattice")
        return np.broadcast_to(s, r.shape)

    def __call__(self, xi):
        return self.on_lattice(np.asarray(xi, dtype=float))


def homogeneous_power(s: float) -> MultiplierKind:
    s = float(s)
    if s == 0:
        return MultiplierKind("|xi|^0", lambda xi: np.ones(xi.shape[:-1]), False, (s,))
    return MultiplierKind(f"|xi|^{s:g}", lambda xi: np.linalg.norm(xi, axis=-1) ** s, s < 0, (s,))


def bracket_power(s: float) -> MultiplierKind:
    s = float(s)
    return MultiplierKind(
        f"<xi>^{s:g}", lambda xi: (1.0 + np.sum(xi**2, axis=-1)) ** (s / 2), False, (s,)
    )


def symbol_power(spec: SymbolSpec, s: float) -> MultiplierKind:
    s = float(s)
    if s == 0:
        return MultiplierKind("a^0", lambda xi: np.ones(xi.shape[:-1]), False, (s,))
    return MultiplierKind(f"{spec.label()}^{s:g}", lambda xi: spec.a(xi) ** s, s < 0, (s,))


def degree_zero(q: Callable, name: str = "q") -> MultiplierKind:
    """A symbol homogeneous of degree 0.

    A constant ``q`` keeps its value at the origin; any other ``q`` has the
    zero mode annihilated.
    """
    probe = np.array([[1.0, 0.3, -0.2], [-0.4, 1.0, 0.7], [0.1, -0.9, 1.0]])
    try:
        samples = [np.atleast_1d(q(probe[:, :d])) for d in (1, 2, 3)]
        constant = all(np.ptp(np.real(v)) == 0 and np.ptp(np.imag(v)) == 0 for v in samples)
        c0 = complex(samples[-1][0])
    except Exception:
        constant = False
    if constant:
        return MultiplierKind(name, lambda xi: np.full(xi.shape[:-1], c0), False)
    return MultiplierKind(name, q, True)


def riesz_symbol(j: int = 0) -> MultiplierKind:
    """``xi_j / |xi|``."""
    return degree_zero(lambda xi: xi[..., j] / np.linalg.norm(xi, axis=-1), name=f"xi_{j + 1}/|xi|")


def scalar_function(sigma: Callable, name: str = "sigma") -> MultiplierKind:
    return MultiplierKind(name, sigma, False)


def apply_multiplier(f: Field, kind: MultiplierKind) -> Field:
    """``sigma(D) f``; a physical input returns a physical field."""
    F = f if f.space == FREQUENCY else forward_ft(f)
    sigma = kind.on_lattice(F.grid.xi)
    out = F.with_values(F.values * sigma, zero_mode_annihilated=F.zero_mode_annihilated or kind.singular_at_zero)
    return out if f.space == FREQUENCY else inverse_ft(out)


# -- smooth cutoff and the low/high frequency splitting ----------------------


def _psi(t):
    t = np.asarray(t, dtype=float)
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, np.exp(-1.0 / safe), 0.0)


def chi_cutoff(xi) -> np.ndarray:
    """C-infinity cutoff: 1 for ``|xi| <= 1``, 0 for ``|xi| >= 2``, monotone between."""
    r = np.linalg.norm(np.asarray(xi, float), axis=-1)
    u, v = _psi(2.0 - r), _psi(r - 1.0)
    return u / (u + v)


def splitting_symbols(m: float):
    """``(b1, b2)`` with ``b1 + |xi|^(m-1) b2 = <xi>^(m-1)``; ``b2`` vanishes near 0."""

    def b1(xi):
        return (1.0 + np.sum(xi**2, axis=-1)) ** ((m - 1) / 2) * chi_cutoff(xi)

    def b2(xi):
        r = np.linalg.norm(xi, axis=-1)
        safe = np.where(r > 0, r, 1.0)
        tail = 1.0 - chi_cutoff(xi)
        return np.where(r > 0, (1.0 + r**2) ** ((m - 1) / 2) * tail / safe ** (m - 1), 0.0)

    return scalar_function(b1, "b1"), scalar_function(b2, "b2")


def splitting_residual(grid, m: float) -> float:
    b1, b2 = splitting_symbols(m)
    xi = grid.xi
    lhs = b1(xi) + np.linalg.norm(xi, axis=-1) ** (m - 1) * b2(xi)
    rhs = (1.0 + np.sum(xi**2, axis=-1)) ** ((m - 1) / 2)
    return float(np.max(np.abs(lhs - rhs) / rhs))


def conjugated_ratio(f: Field, b: MultiplierKind, s: float) -> float:
    """``||<x>^s b(D) <x>^-s f|| / ||f||`` (L^2 boundedness probe)."""
    g = f.grid
    inner = f.with_values(f.values * g.bracket ** (-s))
    out = apply_multiplier(inner, b)
    return float(np.sqrt(np.sum(np.abs(out.values * g.bracket**s) ** 2) * g.cell)) / f.norm()


# -- weighted inequalities --------------------------------------------------


def _nonzero(f: Field):
    if f.space != PHYSICAL:
        raise UsageError("expected a physical field")
    if f.is_zero():
        raise UsageError("f must be nonzero")


def _singular_gaussian_ft(xi, n, alpha, w):
    """Transforms of ``|x|^-alpha G`` and ``x_j |x|^-alpha G`` with ``G = exp(-|x|^2/(2 w^2))``."""
    k = (n - alpha) / 2
    c = 2 ** (-alpha / 2) * gamma(k) / gamma(n / 2) * w ** (n - alpha)
    z = -0.5 * w**2 * np.sum(xi**2, axis=-1)
    base = c * hyp1f1(k, n / 2, z)
    first = -1j * c * w**2 * (2 * k / n) * hyp1f1(k + 1, n / 2 + 1, z)[..., None] * xi
    return base, first


def power_weighted_ft(f: Field, alpha: float) -> Field:
    """Transform of ``|x|^-alpha f`` for ``0 <= alpha < n``.

    The first-order Taylor part of ``f`` at the origin is carried by a Gaussian
    whose weighted transform is known in closed form; only the milder remainder
    is summed on the lattice.
    """
    g = f.grid
    if alpha == 0:
        return forward_ft(f)
    w = g.L / 8
    F = forward_ft(f)
    f0 = f.values[g.origin_index]
    grad0 = np.array([np.sum(1j * g.xi[..., d] * F.values) for d in range(g.n)])
    grad0 = grad0 * g.freq_cell / (2 * np.pi) ** (g.n / 2)
    G = np.exp(-np.sum(g.x**2, axis=-1) / (2 * w**2))
    rest = (f.values - f0 * G - (g.x @ grad0) * G) * power_weight(g, -alpha)
    base, first = _singular_gaussian_ft(g.xi, g.n, alpha, w)
    out = forward_ft(f.with_values(rest)).values + f0 * base + first @ grad0
    return F.with_values(out)


def stein_weiss_ratio(f: Field, spec: SymbolSpec, alpha: float, beta: float, gamma: float) -> float:
    """``|| a^-beta |D_xi|^-alpha f^ || / || a^gamma f^ ||`` with ``|D_xi|^-alpha f^ = (|x|^-alpha f)^``."""
    _nonzero(f)
    n = f.grid.n
    if not (alpha == beta == gamma == 0):
        require(0 < alpha < n, "0<alpha<n", "Stein-Weiss")
        require(beta < n / 2, "beta<n/2", "Stein-Weiss")
        require(gamma < n / 2, "gamma<n/2", "Stein-Weiss")
        require(abs(alpha - beta - gamma) <= 1e-12, "alpha=beta+gamma", "Stein-Weiss")
    num = apply_multiplier(power_weighted_ft(f, alpha), symbol_power(spec, -beta)).norm()
    den = apply_multiplier(forward_ft(f), symbol_power(spec, gamma)).norm()
    return num / den


def stein_weiss_special_ratio(f: Field, spec: SymbolSpec, beta: float) -> float:
    """``|| a^-beta f^ || / || |x|^beta f ||`` for ``0 <= beta < n/2``."""
    _nonzero(f)
    require(0 <= beta < f.grid.n / 2, "0<=beta<n/2", "Stein-Weiss special case")
    num = apply_multiplier(forward_ft(f), symbol_power(spec, -beta)).norm()
    den = np.sqrt(np.sum(np.abs(power_weight(f.grid, beta) * f.values) ** 2) * f.grid.cell)
    return num / den


def check_commutator_delta(n: int, delta: float) -> None:
    require(n >= 2, "n>=2", "weight commutator")
    if n == 2:
        require(0 < delta < 1, "0<delta<1 (n=2)", "weight commutator")
    else:
        require(0 < delta <= 1, "0<delta<=1 (n>=3)", "weight commutator")


def weight_commutator_apply(f: Field, delta: float, q: MultiplierKind) -> Field:
    """``|x|^delta q(D) f - q(D) (|x|^delta f)``."""
    if f.space != PHYSICAL:
        raise UsageError("expected a physical field")
    check_commutator_delta(f.grid.n, delta)
    w = power_weight(f.grid, delta)
    left = apply_multiplier(f, q).values * w
    right = apply_multiplier(f.with_values(f.values * w), q).values
    return f.with_values(left - right, zero_mode_annihilated=q.singular_at_zero)


def weight_commutator_ratio(f: Field, delta: float, q: MultiplierKind) -> float:
    _nonzero(f)
    c = weight_commutator_apply(f, delta, q)
    den = np.sqrt(np.sum(np.abs(power_weight(f.grid, delta) * f.values) ** 2) * f.grid.cell)
    return c.norm() / den


def check_kappa(n: int, kappa: float) -> None:
    require(n >= 2, "n>=2", "frequency commutator")
    if n == 2:
        require(0 < kappa < 1, "0<kappa<1 (n=2)", "frequency commutator")
    else:
        require(0 < kappa < 1.5, "0<kappa<3/2 (n>=3)", "frequency commutator")


def r_kappa_apply(F: Field, kappa: float):
    """``r_kappa(D_xi) F = -(|x|^(kappa-1) x check-F)^`` per component; returns a list of frequency fields."""
    g = F.grid
    phys = inverse_ft(F)
    r = g.r
    safe = np.where(r > 0, r, 1.0)
    radial = np.where(r > 0, safe ** (kappa - 1.0), 0.0)
    out = []
    for d in range(g.n):
        comp = phys.with_values(-radial * g.x[..., d] * phys.values)
        out.append(forward_ft(comp))
    return out


def sandwich_apply(f: Field, spec: SymbolSpec, kappa: float):
    """Components of ``a^-rho r_kappa(D_xi) a^rho f^`` with ``rho = (n-1)/2``."""
    rho = (f.grid.n - 1) / 2
    F = forward_ft(f)
    inner = apply_multiplier(F, symbol_power(spec, rho))
    outer = symbol_power(spec, -rho)
    return [apply_multiplier(c, outer) for c in r_kappa_apply(inner, kappa)]


def freq_commutator_ratio(f: Field, spec: SymbolSpec, kappa: float) -> float:
    """``|| a^-rho r_kappa(D_xi) a^rho f^ || / || |x|^kappa f ||``."""
    _nonzero(f)
    check_kappa(f.grid.n, kappa)
    comps = sandwich_apply(f, spec, kappa)
    num = np.sqrt(sum(c.norm() ** 2 for c in comps))
    den = np.sqrt(np.sum(np.abs(power_weight(f.grid, kappa) * f.values) ** 2) * f.grid.cell)
    return float(num / den)


def case3_identity_residual(f: Field, spec: SymbolSpec) -> float:
    """Relative residual of ``{a^-rho D_xi a^rho - D_xi} f^ = -i rho a'/a f^`` (kappa = 1)."""
    _nonzero(f)
    g = f.grid
    rho = (g.n - 1) / 2
    lhs = sandwich_apply(f, spec, 1.0)
    plain = r_kappa_apply(forward_ft(f), 1.0)
    F = forward_ft(f).values
    xi = g.xi
    r = np.linalg.norm(xi, axis=-1)
    nz = r > 0
    grad = np.zeros_like(xi)
    grad[nz] = spec.grad_a(xi[nz])
    a = np.where(nz, spec.a(xi), 1.0)
    num = den = 0.0
    for d in range(g.n):
        expected = np.where(nz, -1j * rho * grad[..., d] / a * F, 0.0)
        diff = (lhs[d].values - plain[d].values - expected)[nz]
        num += np.sum(np.abs(diff) ** 2)
        den += np.sum(np.abs(expected) ** 2)
    return float(np.sqrt(num / den))
