"""Resolvent quadratic forms, limiting absorption, and the identities around them.

``form(b, f, g, zeta) = (b(D) (zeta - p(D))^{-1} f, g)`` is available on the
frequency lattice (:func:`resolvent_form`) and through the co-area density
``h(tau) = int_{p = tau} b |f^|^2 / |p'| dsigma`` (:class:`SpectralDensity`),
which reaches small ``eta`` without the lattice's spurious near-poles.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C

from .errors import UsageError, require
from .grid import FREQUENCY, PHYSICAL, Field, forward_ft, nuft_eval, transform_frames
from .multiplier import MultiplierKind, apply_multiplier, bracket_power, homogeneous_power, scalar_function
from .report import RatioReport, grid_meta
from .symbol import SymbolSpec
from .trace import build_quad, gauss_panels


# -- spectral parameter grid ----------------------------------------------------


@dataclass(frozen=True)
class ZetaGrid:
    lambda_values: tuple
    eta_values: tuple
    signs: tuple = (1, -1)

    def __post_init__(self):
        object.__setattr__(self, "lambda_values", tuple(float(v) for v in self.lambda_values))
        object.__setattr__(self, "eta_values", tuple(float(v) for v in self.eta_values))
        if not self.eta_values or min(self.eta_values) <= 0:
            raise UsageError("every eta must be positive")
        if any(s not in (1, -1) for s in self.signs):
            raise UsageError("signs must be +1 or -1")

    @property
    def eta_min(self) -> float:
        return min(self.eta_values)

    def points(self):
        return [complex(lam, s * eta) for lam in self.lambda_values for eta in self.eta_values for s in self.signs]

    def halved_floor(self) -> "ZetaGrid":
        """The same grid with ``eta_min / 2`` appended."""
        return ZetaGrid(self.lambda_values, self.eta_values + (self.eta_min / 2,), self.signs)


def make_zeta_grid(Lambda: float, eta_max: float, eta_min: float, n_eta: int = 6,
                   n_bulk: int = 40, n_cluster: int = 12, signs=(1, -1)) -> ZetaGrid:
    """``lambda`` clustered geometrically near 0 and uniform across ``[-Lambda, Lambda]``."""
    require(Lambda > 0 and eta_max >= eta_min > 0, "0<eta_min<=eta_max, Lambda>0", "zeta grid")
    bulk = np.linspace(-Lambda, Lambda, n_bulk + 1)
    cluster = Lambda * np.geomspace(1e-4, 0.05, n_cluster)
    lam = np.unique(np.concatenate([bulk, cluster, -cluster[:3]]))
    eta = np.geomspace(eta_max, eta_min, n_eta)
    return ZetaGrid(tuple(lam), tuple(eta), tuple(signs))


# -- lattice form ----------------------------------------------------------------


def _spectrum(f: Field) -> Field:
    return f if f.space == FREQUENCY else forward_ft(f)


def resolvent_form(b: MultiplierKind, f: Field, g: Field, spec: SymbolSpec, zeta: complex) -> complex:
    """Lattice ``sum b f^ conj(g^) / (zeta - p) dxi^n``."""
    zeta = complex(zeta)
    if zeta.imag == 0:
        raise UsageError("zeta must be off the real axis")
    F, G = _spectrum(f), _spectrum(g)
    xi = F.grid.xi
    return complex(np.sum(b.on_lattice(xi) * F.values * np.conj(G.values) / (zeta - spec.p(xi))) * F.grid.freq_cell)


def polarization_check(b: MultiplierKind, f: Field, g: Field, spec: SymbolSpec, zeta: complex) -> float:
    """``|B(f,g) - (B(f+g) - B(f-g) + i B(f+ig) - i B(f-ig)) / 4|`` with ``B(h) = B(h, h)``."""
    F, G = _spectrum(f), _spectrum(g)

    def B(u, v=None):
        return resolvent_form(b, u, u if v is None else v, spec, zeta)

    lhs = B(F, G)
    rhs = 0.25 * (B(F + G) - B(F - G) + 1j * B(F + 1j * G) - 1j * B(F - 1j * G))
    return float(abs(lhs - rhs))


def resolvent_identity_residual(f: Field, spec: SymbolSpec, z1: complex, z2: complex) -> float:
    """Relative gap in ``R(z1) - R(z2) = (z2 - z1) R(z1) R(z2)`` tested against ``f``."""
    one = homogeneous_power(0)
    F = _spectrum(f)
    p = spec.p(F.grid.xi)
    lhs = resolvent_form(one, F, F, spec, z1) - resolvent_form(one, F, F, spec, z2)
    rhs = (z2 - z1) * np.sum(np.abs(F.values) ** 2 / ((z1 - p) * (z2 - p))) * F.grid.freq_cell
    return float(abs(lhs - rhs) / max(abs(lhs), 1e-300))


# -- co-area density ---------------------------------------------------------------


def degree_at_zero(b: MultiplierKind) -> float:
    """Power of ``|xi|`` with which ``b`` vanishes (or blows up) at the origin."""
    if b.name.startswith("|xi|^") or b.name.startswith(("a^", "euclid^", "lp4^", "bump")):
        return float(b.params[0]) if b.params else 0.0
    return 0.0


class SpectralDensity:
    """``h(tau) = int_{p = tau} b |f^|^2 / |p'| dsigma`` for one ``(b, f)``.

    With ``tau = r^m`` and ``k(r) = h(tau) dtau/dr = r^{n-1} int_{Sigma(1)} b(r w)
    |f^(r w)|^2 / |a'(w)| dsigma(w)``.  The factor ``r^{n-1+d}`` (``d`` the degree of
    ``b`` at 0) is kept exact and the smooth remainder is a Chebyshev interpolant.
    """

    def __init__(self, b: MultiplierKind, f: Field, spec: SymbolSpec, resolution: int = 128,
                 degree: int = 96, rel: float = 1e-10, r_max: float = None):
        self.b, self.spec = b, spec
        self.n, self.m = spec.n, spec.m
        self.d = degree_at_zero(b)
        F = _spectrum(f)
        phys = f if f.space == PHYSICAL else None
        if phys is None:
            from .grid import inverse_ft
            phys = inverse_ft(F)
        if r_max is None:
            amp = np.abs(F.values) ** 2
            mask = amp > rel * amp.max()
            r_max = float(np.max(spec.a(F.grid.xi[mask]))) * 1.15
        self.r_max = r_max
        self.tau_max = r_max**self.m
        quad = build_quad(spec, 1.0, resolution) if spec.n > 1 else None
        if spec.n == 1:
            omega = np.array([[1.0], [-1.0]])
            nodes = omega / spec.a(omega)[:, None]
            w = np.ones(2) / np.abs(spec.grad_a(omega)[:, 0])
        else:
            nodes = quad.nodes
            w = quad.weights / np.linalg.norm(spec.grad_a(quad.directions), axis=-1)

        def K(r):
            r = np.atleast_1d(r)
            pts = (r[:, None, None] * nodes[None]).reshape(-1, spec.n)
            vals = np.abs(nuft_eval(phys, pts)) ** 2
            bv = np.real(b(pts))
            rr = np.repeat(r, len(nodes))
            safe = np.where(rr > 0, rr, 1.0)
            bv = bv / safe**self.d if self.d else bv
            return np.sum((bv * vals).reshape(len(r), -1) * w, axis=1)

        self.cheb = C.Chebyshev.interpolate(K, degree, domain=[0, r_max])
        self.dcheb = self.cheb.deriv()

    def k(self, r):
        r = np.asarray(r, float)
        return r ** (self.n - 1 + self.d) * self.cheb(r)

    def h(self, tau):
        tau = np.asarray(tau, float)
        r = tau ** (1 / self.m)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.k(r) / (self.m * r ** (self.m - 1))
        return np.where(tau <= self.tau_max, out, 0.0)

    def dh(self, tau):
        """``dh/dtau``."""
        tau = float(tau)
        r = tau ** (1 / self.m)
        q = self.n - 1 + self.d
        k = r**q * self.cheb(r)
        dk = q * r ** (q - 1) * self.cheb(r) + r**q * self.dcheb(r)
        m = self.m
        dh_dr = dk / (m * r ** (m - 1)) - k * (m - 1) / (m * r**m)
        return dh_dr / (m * r ** (m - 1))

    def total(self) -> float:
        """``int h dtau``, which equals ``int b |f^|^2 dxi``."""
        r, w = gauss_panels(0.0, self.r_max, 8, 24, grading=2.0)
        return float(np.sum(w * self.k(r)))

    def form(self, zeta: complex) -> complex:
        """``int_0^inf h(tau) / (zeta - tau) dtau`` with the pole at ``Re zeta`` subtracted."""
        zeta = complex(zeta)
        if zeta.imag == 0:
            raise UsageError("zeta must be off the real axis")
        lam, eta = zeta.real, abs(zeta.imag)
        T = self.tau_max
        nodes, weights = _tau_rule(lam, eta, T)
        hv = self.h(nodes)
        if 0 < lam < T:
            h0, h1 = float(self.h(lam)), self.dh(lam)
            smooth = np.sum(weights * (hv - h0 - h1 * (nodes - lam)) / (zeta - nodes))
            L = np.log(zeta) - np.log(zeta - T)
            return complex(smooth + h0 * L + h1 * ((zeta - lam) * L - T))
        return complex(np.sum(weights * hv / (zeta - nodes)))


def _tau_rule(lam, eta, T, order=12):
    """Gauss panels on ``[0, T]``, graded toward 0 and toward ``lam``."""
    edges = [0.0, T]
    anchor = lam if 0 < lam < T else None
    left = anchor if anchor is not None else T
    edges += list(left * 2.0 ** -np.arange(1, 40))
    edges += list(np.linspace(0, T, 17))
    if anchor is not None:
        d = max(eta, 1e-9 * T) * 2.0 ** np.arange(-2, 60)
        d = d[d < T]
        edges += list(anchor - d[d < anchor]) + list(anchor + d[anchor + d < T]) + [anchor]
    edges = np.unique(np.clip(edges, 0, T))
    edges = edges[np.concatenate([[True], np.diff(edges) > 1e-14 * T])]
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1], edges[1:]
    nodes = ((hi - lo)[:, None] / 2 * x + (hi + lo)[:, None] / 2).ravel()
    weights = ((hi - lo)[:, None] / 2 * w).ravel()
    return nodes, weights


# -- sup ratios ----------------------------------------------------------------------


RESOLVENT_ESTIMATES = ("T12_I", "T12_II", "L51")


def resolvent_setup(estimate: str, spec: SymbolSpec, delta=None, enforce: bool = True):
    """Hypothesis gate; returns ``(b, rhs weight exponent)``."""
    m, n = spec.m, spec.n
    gate = require if enforce else (lambda *a, **k: None)
    if estimate == "T12_I":
        gate(m > 1, "m>1", "TYPE-I resolvent estimate")
        if delta is None:
            raise UsageError("TYPE-I estimates need delta")
        gate(delta > 0.5, "delta>1/2", "TYPE-I resolvent estimate")
        return homogeneous_power(m - 1), float(delta)
    if estimate == "T12_II":
        gate(1 < m < n, "1<m<n", "TYPE-II resolvent estimate")
        return bracket_power(m - 1), m / 2
    if estimate == "L51":
        gate(1 < m < n, "1<m<n", "low-frequency resolvent estimate")
        return scalar_function(lambda xi: np.ones(xi.shape[:-1]), "1"), m / 2
    raise UsageError(f"unknown resolvent estimate {estimate!r}; expected one of {RESOLVENT_ESTIMATES}")


def resolvent_sup_ratio(family, spec: SymbolSpec, estimate: str, zgrid: ZetaGrid, delta=None,
                        method: str = "coarea", member_ids=None, enforce: bool = True):
    """Per-member ``sup_zeta |form(b, f, f, zeta)| / ||<x>^s f||^2`` on ``zgrid``.

    Each row's ``aux`` carries ``eta_at_sup``, ``lambda_at_sup`` and
    ``eta_trend`` (relative change between the sup over ``eta = eta_min`` and
    over ``eta = 2 eta_min``-or-next).
    """
    family = list(family)
    if not family:
        raise UsageError("family must be nonempty")
    b, s = resolvent_setup(estimate, spec, delta, enforce)
    if method not in ("coarea", "lattice"):
        raise UsageError(f"unknown method {method!r}")
    rows = []
    etas = sorted(set(zgrid.eta_values))
    for idx, f in enumerate(family):
        if f.is_zero():
            raise UsageError("family members must be nonzero")
        rhs2 = float(np.sum(np.abs(f.grid.bracket**s * f.values) ** 2) * f.grid.cell)
        if method == "coarea":
            dens = SpectralDensity(b, f, spec)
            evaluate = dens.form
        else:
            evaluate = lambda z, f=f: resolvent_form(b, f, f, spec, z)
        best = (-1.0, None)
        by_eta = {}
        for z in zgrid.points():
            v = abs(evaluate(z)) / rhs2
            eta = abs(z.imag)
            by_eta[eta] = max(by_eta.get(eta, 0.0), v)
            if v > best[0]:
                best = (v, z)
        e0 = etas[0]
        e1 = etas[1] if len(etas) > 1 else etas[0]
        trend = abs(by_eta[e0] - by_eta[e1]) / by_eta[e0]
        params = {"m": spec.m, "n": spec.n, "symbol": spec.label(), "method": method}
        if estimate == "T12_I":
            params["delta"] = float(delta)
        if not enforce:
            params["negative_control"] = True
        mid = member_ids[idx] if member_ids else str(idx)
        rows.append(RatioReport(estimate, mid, best[0] * rhs2, rhs2, params,
                                grid_meta(f.grid, eta_min=zgrid.eta_min),
                                {"eta_at_sup": abs(best[1].imag), "lambda_at_sup": best[1].real,
                                 "eta_trend": trend}))
    return rows


# -- Kato chain ----------------------------------------------------------------------


def kato_identity_details(Q_weight_exp: float, Q_deriv: MultiplierKind, F, spec: SymbolSpec, eta_list,
                          tau_density: float = 4.0):
    """Both sides of ``int |Q*F~(p(xi), xi)|^2 dxi = lim (-1/pi) Im int_0^inf form(tau + i eta) dtau``.

    ``Q* = Q_deriv(D) <x>^{-Q_weight_exp}``; ``F~`` is the space-time transform.
    ``tau_density`` is the number of ``tau`` samples per ``eta_min``.
    """
    eta_list = [float(e) for e in eta_list]
    if len(eta_list) < 2 or any(a <= b for a, b in zip(eta_list, eta_list[1:])):
        raise UsageError("eta_list must be decreasing with at least two entries")
    g, tg = F.grid, F.time_grid
    if F.is_zero():
        return {"A": 0.0, "B": [0.0] * len(eta_list), "B_extrap": 0.0, "residual": 0.0}
    inner = F.values * g.bracket ** (-Q_weight_exp)
    G = transform_frames(inner, g) * Q_deriv.on_lattice(g.xi)
    Gt = G.reshape(len(tg.t), -1)
    p = spec.p(g.xi).ravel()
    w = tg.weights / np.sqrt(2 * np.pi)
    # A: time transform evaluated at tau = p(xi), lattice point by lattice point
    tilde_on_shell = np.einsum("k,kj,kj->j", w, np.exp(-1j * np.outer(tg.t, p)), Gt)
    A = float(np.sum(np.abs(tilde_on_shell) ** 2) * g.freq_cell)
    # B(eta): tau-trapezoid of the lattice form with |G~(tau, xi)|^2
    amp = np.sum(np.abs(Gt) ** 2, axis=0)
    active = amp > 1e-24 * amp.max()
    tau_max = float(p[active].max()) + 40 * eta_list[0]
    dtau = min(eta_list) / tau_density
    taus = np.arange(0.0, tau_max + dtau, dtau)
    wt = np.full(len(taus), dtau)
    wt[0] = wt[-1] = dtau / 2
    Ga, pa = Gt[:, active], p[active]
    Bs = np.zeros(len(eta_list))
    for start in range(0, len(taus), 512):
        tt = taus[start:start + 512]
        E = np.exp(-1j * np.outer(tt, tg.t)) * w
        dens = np.abs(E @ Ga) ** 2
        for i, eta in enumerate(eta_list):
            form = np.sum(dens / (tt[:, None] + 1j * eta - pa[None, :]), axis=1) * g.freq_cell
            Bs[i] += -np.sum(wt[start:start + 512] * form.imag) / np.pi
    e1, e2 = eta_list[-1], eta_list[-2]
    B_extrap = (e2 * Bs[-1] - e1 * Bs[-2]) / (e2 - e1)
    return {"A": A, "B": list(Bs), "B_extrap": float(B_extrap), "residual": abs(A - B_extrap) / A,
            "dtau": dtau}


def kato_identity_residual(Q_weight_exp, Q_deriv, F, spec, eta_list, tau_density: float = 4.0) -> float:
    return float(kato_identity_details(Q_weight_exp, Q_deriv, F, spec, eta_list, tau_density)["residual"])


# -- principal value, Heaviside, Poisson/trace consistency ----------------------------------------


def pv_vanish(lam: float, eta: float, quad_points: int, symmetric: bool = True) -> float:
    """``int_{lam/2}^{3 lam/2} (lam - tau) / ((lam - tau)^2 + eta^2) dtau`` by quadrature.

    The symmetric rule pairs nodes ``mu`` and ``-mu`` around ``tau = lam``;
    ``symmetric=False`` uses a left-endpoint rule as a control.
    """
    require(lam > 0 and eta > 0, "lambda>0, eta>0", "principal value")
    if quad_points < 2 or quad_points % 2:
        raise UsageError("quad_points must be even and >= 2")
    if symmetric:
        x, w = np.polynomial.legendre.leggauss(quad_points)
        x, w = x[x > 0], w[x > 0]
        mu = lam / 2 * x
        f = mu / (mu**2 + eta**2)
        # integrand of -int mu/(mu^2+eta^2) dmu at the pair (mu, -mu)
        pair = (-f) + (-(-mu) / ((-mu) ** 2 + eta**2))
        return float(np.sum(lam / 2 * w * pair))
    tau = lam / 2 + lam * np.arange(quad_points) / quad_points
    return float(np.sum((lam - tau) / ((lam - tau) ** 2 + eta**2)) * lam / quad_points)


def heaviside_split(F):
    """``(Y(t) F, Y(-t) F)`` with ``Y(0) = 1``, so the ``t = 0`` frame goes to the first part."""
    t = F.time_grid.t
    shape = (-1,) + (1,) * F.grid.n
    plus = (t >= 0).astype(float).reshape(shape)
    minus = (t < 0).astype(float).reshape(shape)
    return F.with_values(F.values * plus), F.with_values(F.values * minus)


def poisson_trace_residual(f: Field, spec: SymbolSpec, lam: float, eta: float,
                           b: MultiplierKind = None) -> dict:
    """Lattice ``Im form(b, f, f, lam + i eta)`` against ``-int P_eta(lam - tau) h(tau) dtau``.

    ``h(tau)`` is the level-set trace density, so the right side is built only from
    restrictions of ``f^`` to ``{p = tau}``.  As ``eta -> 0`` it tends to ``-pi h(lam)``.
    """
    b = b or homogeneous_power(spec.m - 1)
    dens = SpectralDensity(b, f, spec)
    lattice = resolvent_form(b, f, f, spec, complex(lam, eta)).imag
    poisson = dens.form(complex(lam, eta)).imag
    return {"lattice": lattice, "trace": poisson, "limit": -np.pi * float(dens.h(lam)),
            "residual": abs(lattice - poisson) / abs(poisson)}
