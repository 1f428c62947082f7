"""Level-set quadrature and restriction of the Fourier transform to ``{a = tau}``.

Since ``a`` is elliptic, ``Sigma(1)`` is the radial graph ``omega -> omega / a(omega)``
over the unit sphere, and ``Sigma(tau) = tau Sigma(1)``.  Surface weights come
from the parameter partials of that graph.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UsageError, require
from .grid import FREQUENCY, PHYSICAL, Field, inverse_ft, nuft_eval, weighted_norm
from .symbol import SymbolSpec


@dataclass(frozen=True, eq=False)
class LevelSetQuad:
    spec: SymbolSpec
    tau: float
    nodes: np.ndarray
    weights: np.ndarray
    sphere_rule: str
    resolution: int
    directions: np.ndarray = field(repr=False)
    sphere_weights: np.ndarray = field(repr=False)

    @property
    def area(self) -> float:
        return float(self.weights.sum())

    def integrate(self, values) -> complex:
        return np.sum(self.weights * values)

    def scaled(self, tau: float) -> "LevelSetQuad":
        """The same rule moved to ``Sigma(tau)``."""
        require(tau > 0, "tau>0", "level set")
        s = tau / self.tau
        n = self.nodes.shape[-1]
        return LevelSetQuad(self.spec, tau, self.nodes * s, self.weights * s ** (n - 1),
                            self.sphere_rule, self.resolution, self.directions, self.sphere_weights)

    def to_csv(self, path) -> None:
        n = self.nodes.shape[-1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"xi_{d + 1}" for d in range(n)] + ["weight"])
            for node, wt in zip(self.nodes, self.weights):
                w.writerow([repr(float(v)) for v in node] + [repr(float(wt))])


def sphere_rule(n: int, resolution: int):
    """Unit-sphere directions, their parameter partials, and parameter-space weights."""
    if n == 2:
        th = 2 * np.pi * np.arange(resolution) / resolution
        omega = np.stack([np.cos(th), np.sin(th)], axis=-1)
        d_th = np.stack([-np.sin(th), np.cos(th)], axis=-1)
        return omega, [d_th], np.full(resolution, 2 * np.pi / resolution), "trapezoid_angle"
    if n == 3:
        x, wg = np.polynomial.legendre.leggauss(resolution)
        phi = np.pi * (x + 1) / 2
        wphi = wg * np.pi / 2
        nl = 2 * resolution
        psi = 2 * np.pi * np.arange(nl) / nl
        P, S = np.meshgrid(phi, psi, indexing="ij")
        omega = np.stack([np.sin(P) * np.cos(S), np.sin(P) * np.sin(S), np.cos(P)], -1).reshape(-1, 3)
        d_phi = np.stack([np.cos(P) * np.cos(S), np.cos(P) * np.sin(S), -np.sin(P)], -1).reshape(-1, 3)
        d_psi = np.stack([-np.sin(P) * np.sin(S), np.sin(P) * np.cos(S), 0 * P], -1).reshape(-1, 3)
        w = np.outer(wphi, np.full(nl, 2 * np.pi / nl)).ravel()
        return omega, [d_phi, d_psi], w, "product_lat_long"
    raise UsageError("level-set quadrature supports n in {2, 3}")


def build_quad(spec: SymbolSpec, tau: float, resolution: int = 256) -> LevelSetQuad:
    """Quadrature on ``Sigma(tau)`` from the radial graph of ``Sigma(1)``."""
    require(tau > 0, "tau>0", "level set")
    require(resolution >= 8, "resolution>=8", "level set")
    n = spec.n
    if n == 1:
        omega = np.array([[1.0], [-1.0]])
        nodes = tau * omega / spec.a(omega)[:, None]
        return LevelSetQuad(spec, tau, nodes, np.ones(2), "points", resolution, omega, np.ones(2))
    omega, partials, w_param, rule = sphere_rule(n, resolution)
    a = spec.a(omega)
    ga = spec.grad_a(omega)
    nodes = tau * omega / a[:, None]
    # partials of xi = tau * omega / a(omega)
    tang = [tau * (d / a[:, None] - omega * (np.sum(ga * d, -1) / a**2)[:, None]) for d in partials]
    if n == 2:
        jac = np.linalg.norm(tang[0], axis=-1)
    else:
        jac = np.linalg.norm(np.cross(tang[0], tang[1]), axis=-1)
    return LevelSetQuad(spec, float(tau), nodes, jac * w_param, rule, resolution, omega, w_param)


def _check_quad(f: Field, quad: LevelSetQuad):
    if f.space != PHYSICAL:
        raise UsageError("expected a physical field")
    if quad.nodes.shape[-1] != f.grid.n:
        raise UsageError("quadrature and field dimensions differ")
    _check_band(f, quad.nodes)


def _check_band(f: Field, pts):
    """The lattice transform is periodic in ``xi``; points past the Nyquist box would alias."""
    reach = float(np.max(np.abs(pts))) if len(pts) else 0.0
    if reach > f.grid.nyquist:
        raise DomainError(f"level set reaches |xi_j| = {reach:.4g}, beyond the Nyquist "
                          f"frequency {f.grid.nyquist:.4g}; use a finer grid")


def trace_norm(f: Field, quad: LevelSetQuad) -> float:
    """``|| f^ ||_{L^2(Sigma(tau))}``."""
    _check_quad(f, quad)
    if f.is_zero():
        return 0.0
    vals = nuft_eval(f, quad.nodes)
    return float(np.sqrt(np.sum(quad.weights * np.abs(vals) ** 2)))


def _rhs(f: Field, theta: float) -> float:
    r = weighted_norm(f, 0.5 + theta, "japanese_bracket")
    if r == 0:
        raise UsageError("f must be nonzero")
    return r


def trace_ratio(f: Field, quad: LevelSetQuad, theta: float) -> float:
    """``|| f^ ||_{L^2(Sigma(tau))} / || <x>^(1/2+theta) f ||``."""
    require(theta > 0, "theta>0", "uniform trace estimate")
    return trace_norm(f, quad) / _rhs(f, theta)


def check_hoelder_theta(n: int, theta: float) -> None:
    require(n >= 2, "n>=2", "Hoelder continuity")
    if n == 2:
        require(0 < theta <= 0.5, "0<theta<=1/2 (n=2)", "Hoelder continuity")
    else:
        require(0 < theta < 1, "0<theta<1 (n>=3)", "Hoelder continuity")


def hoelder_difference(f: Field, spec: SymbolSpec, tau: float, lam: float, resolution: int = 256) -> float:
    """``|| tau^rho f^(tau .) - lam^rho f^(lam .) ||_{L^2(Sigma(1))}``."""
    q = build_quad(spec, 1.0, resolution)
    _check_quad(f, q)
    rho = (spec.n - 1) / 2
    _check_band(f, max(tau, lam) * q.nodes)
    vt = nuft_eval(f, tau * q.nodes)
    vl = nuft_eval(f, lam * q.nodes)
    return float(np.sqrt(np.sum(q.weights * np.abs(tau**rho * vt - lam**rho * vl) ** 2)))


def hoelder_ratio(f: Field, spec: SymbolSpec, tau: float, lam: float, theta: float,
                  resolution: int = 256) -> float:
    check_hoelder_theta(spec.n, theta)
    require(tau > 0 and lam > 0, "tau,lambda>0", "Hoelder continuity")
    require(tau != lam, "tau!=lambda", "Hoelder continuity")
    diff = hoelder_difference(f, spec, tau, lam, resolution)
    return diff / (abs(tau - lam) ** theta * _rhs(f, theta))


def check_lowfreq_theta(n: int, theta: float) -> None:
    require(0 < theta < (n - 1) / 2, "0<theta<(n-1)/2", "low frequency trace estimate")


def lowfreq_slope(f: Field, spec: SymbolSpec, tau_list, theta: float, resolution: int = 256):
    """Least-squares slope of ``log ||f^||_{Sigma(tau)}`` against ``log tau``, plus the ratios."""
    check_lowfreq_theta(spec.n, theta)
    taus = np.asarray(tau_list, dtype=float)
    require(taus.size >= 2 and np.all((taus > 0) & (taus <= 1)), "tau in (0,1]", "low frequency trace estimate")
    base = build_quad(spec, 1.0, resolution)
    norms = np.array([trace_norm(f, base.scaled(t)) for t in taus])
    slope = float(np.polyfit(np.log(taus), np.log(norms), 1)[0])
    rhs = _rhs(f, theta)
    return slope, list(norms / (taus**theta * rhs))


# -- co-area --------------------------------------------------------------


def gauss_panels(a: float, b: float, panels: int, order: int, grading: float = 1.0):
    """Composite Gauss-Legendre nodes/weights; ``grading > 1`` clusters panels toward ``a``."""
    t = np.linspace(0, 1, panels + 1) ** grading
    edges = a + (b - a) * t
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        nodes.append((hi - lo) / 2 * x + (hi + lo) / 2)
        weights.append((hi - lo) / 2 * w)
    return np.concatenate(nodes), np.concatenate(weights)


def max_inscribed_level(spec: SymbolSpec, nyquist: float, resolution: int = 512) -> float:
    """Largest ``r`` with ``Sigma(r)`` inside the ball of radius ``nyquist``."""
    n = spec.n
    if n == 1:
        omega = np.array([[1.0], [-1.0]])
    else:
        omega = sphere_rule(n, min(resolution, 64 if n == 3 else resolution))[0]
    return float(nyquist * np.min(spec.a(omega)))


def level_integrals(F_interp, spec: SymbolSpec, radii, resolution: int):
    """``int_{Sigma_a(r)} F / |a'| dsigma`` for each ``r`` in ``radii``.

    ``F_interp`` maps an array of frequency points to values.
    """
    base = build_quad(spec, 1.0, resolution)
    ga = np.linalg.norm(spec.grad_a(base.directions), axis=-1)
    out = np.empty(len(radii), dtype=complex)
    n = spec.n
    pts = np.concatenate([r * base.nodes for r in radii])
    vals = F_interp(pts).reshape(len(radii), -1)
    for i, r in enumerate(radii):
        out[i] = np.sum(base.weights * r ** (n - 1) * vals[i] / ga)
    return out


def spectral_interpolant(F: Field):
    """Trigonometric interpolant of a frequency-lattice field at arbitrary points."""
    if F.space != FREQUENCY:
        raise UsageError("expected a frequency field")
    f = inverse_ft(F)
    return lambda pts: nuft_eval(f, pts)


def coarea_residual(F: Field, spec: SymbolSpec, tau_quad: int = 64, sphere_res: int = 128) -> float:
    """Relative gap between ``int F dxi`` and ``int dtau int_{p=tau} F/|p'| dsigma``.

    The outer integral runs over ``tau = r^m`` with Gauss-Legendre nodes in the
    ``a``-level ``r``, so ``dtau = m r^(m-1) dr``.
    """
    if F.space != FREQUENCY:
        raise UsageError("expected a frequency field")
    total = complex(np.sum(F.values) * F.grid.freq_cell)
    if F.is_zero():
        return 0.0
    m = spec.m
    R = max_inscribed_level(spec, F.grid.nyquist)
    panels = max(1, tau_quad // 16)
    r, wr = gauss_panels(0.0, R, panels, tau_quad // panels)
    tau, wtau = r**m, wr * m * r ** (m - 1)
    base = build_quad(spec, 1.0, sphere_res)
    interp = spectral_interpolant(F)
    pts = np.concatenate([ri * base.nodes for ri in r])
    vals = interp(pts).reshape(len(r), -1)
    inner = np.empty(len(r), dtype=complex)
    for i, ri in enumerate(r):
        nodes = ri * base.nodes
        gp = np.linalg.norm(spec.grad_p(nodes), axis=-1)
        inner[i] = np.sum(base.weights * ri ** (spec.n - 1) * vals[i] / gp)
    iterated = np.sum(wtau * inner)
    return float(abs(total - iterated) / abs(total))
