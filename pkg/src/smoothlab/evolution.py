"""Dispersive propagator, Duhamel operator, and the weighted smoothing norms.

The space-time norms are available two ways:

* ``method="window"``: trapezoid quadrature over the frames of a finite
  ``TimeGrid`` (the integral is truncated to ``[-T, T]``);
* ``method="full"``: the integral over all of ``t`` done exactly in time.
  Integrating ``|e^{itp} h|^2`` over ``t`` concentrates the frequency pair on
  ``p(xi) = p(xi')``, which leaves a radial integral of a double integral over
  ``Sigma(1)`` against the transform ``W`` of the squared weight.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import erf, gamma, iv, kv

from .errors import UsageError, require
from .grid import PHYSICAL, Field, GridSpec, forward_ft, inverse_ft, nuft_eval, transform_frames
from .multiplier import MultiplierKind, bracket_power, homogeneous_power
from .report import RatioReport, grid_meta
from .symbol import SymbolSpec

ESTIMATES = ("I_homog", "I_duhamel", "II_homog", "II_duhamel")


# -- time grids and space-time fields ---------------------------------------


@dataclass(frozen=True)
class TimeGrid:
    """Samples ``t_k = -T + k 2T/M``, ``k = 0..M`` (``M`` even, so ``t = 0`` is a sample)."""

    half_span: float
    steps: int

    def __post_init__(self):
        if not self.half_span > 0:
            raise UsageError("time half-span must be positive")
        if self.steps < 2 or self.steps % 2:
            raise UsageError("time steps must be even and >= 2")

    @property
    def dt(self) -> float:
        return 2 * self.half_span / self.steps

    @property
    def t(self) -> np.ndarray:
        return -self.half_span + self.dt * np.arange(self.steps + 1)

    @property
    def zero_index(self) -> int:
        return self.steps // 2

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.steps + 1, self.dt)
        w[0] = w[-1] = self.dt / 2
        return w

    def refined(self) -> "TimeGrid":
        return TimeGrid(self.half_span, 2 * self.steps)

    def extended(self) -> "TimeGrid":
        return TimeGrid(2 * self.half_span, 2 * self.steps)


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Frames on a common grid; ``values`` has shape ``(M + 1, *grid.shape)``."""

    time_grid: TimeGrid
    grid: GridSpec
    values: np.ndarray
    space: str = PHYSICAL

    def __post_init__(self):
        if self.values.shape != (self.time_grid.steps + 1,) + self.grid.shape:
            raise UsageError("frame array does not match time grid and space grid")

    def frame(self, k: int) -> Field:
        return Field(self.grid, self.space, self.values[k])

    @property
    def frames(self):
        return [self.frame(k) for k in range(len(self.values))]

    def with_values(self, values) -> "SpaceTimeField":
        return SpaceTimeField(self.time_grid, self.grid, np.asarray(values, complex), self.space)

    def frame_norms(self) -> np.ndarray:
        axes = tuple(range(1, self.values.ndim))
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=axes) * self.grid.cell)

    def norm(self) -> float:
        """Trapezoid space-time ``L^2`` norm."""
        return float(np.sqrt(np.sum(self.time_grid.weights * self.frame_norms() ** 2)))

    def is_zero(self) -> bool:
        return not np.any(self.values)

    @classmethod
    def from_frames(cls, time_grid: TimeGrid, frames) -> "SpaceTimeField":
        frames = list(frames)
        return cls(time_grid, frames[0].grid, np.stack([f.values for f in frames]), frames[0].space)

    @classmethod
    def from_function(cls, time_grid: TimeGrid, grid: GridSpec, fn) -> "SpaceTimeField":
        """``fn(t, x)`` evaluated frame by frame (``x`` has a trailing axis ``n``)."""
        x = grid.x
        vals = np.stack([np.asarray(fn(t, x), dtype=complex) for t in time_grid.t])
        return cls(time_grid, grid, vals)


# -- propagator and Duhamel ---------------------------------------------------


def _p_on_lattice(spec: SymbolSpec, grid: GridSpec) -> np.ndarray:
    if spec.n != grid.n:
        raise UsageError("symbol and grid dimensions differ")
    return spec.p(grid.xi)


def propagate(phi: Field, spec: SymbolSpec, t: float) -> Field:
    """``e^{itp(D)} phi``."""
    if phi.space != PHYSICAL:
        raise UsageError("expected a physical field")
    F = forward_ft(phi)
    return inverse_ft(F.with_values(F.values * np.exp(1j * t * _p_on_lattice(spec, phi.grid))))


def propagate_frames(phi: Field, spec: SymbolSpec, time_grid: TimeGrid) -> SpaceTimeField:
    F = forward_ft(phi).values
    p = _p_on_lattice(spec, phi.grid)
    spec_frames = np.exp(1j * np.multiply.outer(time_grid.t, p)) * F
    return SpaceTimeField(time_grid, phi.grid, transform_frames(spec_frames, phi.grid, inverse=True))


def _cumulative_quartic(h: np.ndarray, dt: float, start: int) -> np.ndarray:
    """Fourth-order cumulative integral ``int_{t_start}^{t_k} h`` along axis 0.

    Interior intervals use the four-point rule ``(-1, 13, 13, -1)/24``; the
    first and last interval use the one-sided ``(9, 19, -5, 1)/24``.
    """
    M = h.shape[0] - 1
    if M < 3:
        raise UsageError("the fourth-order rule needs at least 4 time samples")
    inc = np.empty((M,) + h.shape[1:], dtype=complex)
    inc[1:M - 1] = (-h[0:M - 2] + 13 * h[1:M - 1] + 13 * h[2:M] - h[3:M + 1]) / 24
    inc[0] = (9 * h[0] + 19 * h[1] - 5 * h[2] + h[3]) / 24
    inc[M - 1] = (9 * h[M] + 19 * h[M - 1] - 5 * h[M - 2] + h[M - 3]) / 24
    inc *= dt
    out = np.zeros_like(h, dtype=complex)
    out[start + 1:] = np.cumsum(inc[start:], axis=0)
    out[:start] = -np.cumsum(inc[:start][::-1], axis=0)[::-1]
    return out


def _cumulative_trapezoid(h: np.ndarray, dt: float, start: int) -> np.ndarray:
    inc = (h[1:] + h[:-1]) * (dt / 2)
    out = np.zeros_like(h, dtype=complex)
    out[start + 1:] = np.cumsum(inc[start:], axis=0)
    out[:start] = -np.cumsum(inc[:start][::-1], axis=0)[::-1]
    return out


def duhamel(f: SpaceTimeField, spec: SymbolSpec, rule: str = "quartic") -> SpaceTimeField:
    """``Gf(t) = int_0^t e^{i(t-s)p(D)} f(s) ds`` on every frame.

    Computed as ``e^{itp} int_0^t e^{-isp} f^(s) ds`` with one transform per frame.
    ``rule`` is ``"quartic"`` (default) or ``"trapezoid"``.
    """
    if f.space != PHYSICAL:
        raise UsageError("expected physical frames")
    tg = f.time_grid
    p = _p_on_lattice(spec, f.grid)
    phase = np.exp(1j * np.multiply.outer(tg.t, p))
    h = transform_frames(f.values, f.grid) / phase
    if rule == "quartic":
        acc = _cumulative_quartic(h, tg.dt, tg.zero_index)
    elif rule == "trapezoid":
        acc = _cumulative_trapezoid(h, tg.dt, tg.zero_index)
    else:
        raise UsageError(f"unknown Duhamel rule {rule!r}")
    return f.with_values(transform_frames(acc * phase, f.grid, inverse=True))


def _central_fourth(u: np.ndarray, dt: float) -> np.ndarray:
    """``d/dt`` on frames ``2..M-2`` by the five-point stencil."""
    return (u[:-4] - 8 * u[1:-3] + 8 * u[3:-1] - u[4:]) / (12 * dt)


def equation_residual(phi: Field, f: SpaceTimeField, spec: SymbolSpec, rule: str = "quartic") -> float:
    """Relative size of ``D_t u - p(D) u - f`` for ``u = e^{itp} phi + i G f``, ``D_t = -i d/dt``.

    Interior frames only; the time derivative is the fourth-order central difference.
    """
    tg = f.time_grid
    u = propagate_frames(phi, spec, tg).values + 1j * duhamel(f, spec, rule).values
    Dt_u = -1j * _central_fourth(u, tg.dt)
    U = transform_frames(u[2:-2], f.grid)
    pu = transform_frames(U * _p_on_lattice(spec, f.grid), f.grid, inverse=True)
    res = Dt_u - pu - f.values[2:-2]
    w = tg.weights[2:-2]
    axes = tuple(range(1, u.ndim))
    num = np.sum(w * np.sum(np.abs(res) ** 2, axis=axes))
    den = np.sum(w * np.sum(np.abs(f.values[2:-2]) ** 2, axis=axes))
    return float(np.sqrt(num / den))


# -- forcing with a closed-form Duhamel integral ---------------------------------


@dataclass(frozen=True, eq=False)
class WaveForcing:
    """``f(t) = -i chi'(t) e^{itp(D)} psi`` with ``chi = (1 + erf(t / sigma)) / 2``.

    Then ``Gf(t) = -i (chi(t) - 1/2) e^{itp(D)} psi`` exactly.
    """

    psi: Field
    sigma: float = 0.5

    def chi(self, t):
        return 0.5 * (1 + erf(np.asarray(t) / self.sigma))

    def dchi(self, t):
        t = np.asarray(t)
        return np.exp(-(t / self.sigma) ** 2) / (self.sigma * np.sqrt(np.pi))

    def frames(self, spec: SymbolSpec, time_grid: TimeGrid) -> SpaceTimeField:
        u = propagate_frames(self.psi, spec, time_grid)
        c = -1j * self.dchi(time_grid.t)
        return u.with_values(u.values * c.reshape((-1,) + (1,) * self.psi.grid.n))

    def exact_duhamel(self, spec: SymbolSpec, time_grid: TimeGrid) -> SpaceTimeField:
        u = propagate_frames(self.psi, spec, time_grid)
        c = -1j * (self.chi(time_grid.t) - 0.5)
        return u.with_values(u.values * c.reshape((-1,) + (1,) * self.psi.grid.n))


# -- transforms of the squared weight ------------------------------------------


class BracketKernel:
    """``W(z) = int <x>^{-2s} e^{i x.zeta} dx`` as a function of ``z = |zeta|`` in ``R^n``.

    ``W = C z^{-nu} K_nu(z)`` with ``nu = n/2 - s``.  When ``2s < n`` it is
    singular at 0; the leading terms ``A_k z^{2k - beta}`` (``beta = n - 2s``)
    are split off and returned by :attr:`singular_terms`, and
    :meth:`regular` gives ``W`` minus those terms.
    """

    def __init__(self, n: int, s: float, terms: int = 2, zmax: float = 60.0, h: float = 2.5e-3):
        self.n, self.s = n, float(s)
        self.nu = n / 2 - self.s
        self.C = (2 * np.pi) ** (n / 2) * 2 ** (1 - self.s) / gamma(self.s)
        self.singular_terms = []
        if self.nu > 0:
            if float(self.nu).is_integer():
                raise UsageError("the full-time evaluator needs 2s - n to be a non-even-integer")
            pref = self.C * np.pi / (2 * np.sin(self.nu * np.pi))
            for k in range(terms):
                coef = pref * 2 ** (self.nu - 2 * k) / (gamma(k + 1) * gamma(k + 1 - self.nu))
                self.singular_terms.append((coef, 2 * k - 2 * self.nu))
            self._pref = pref
            self._terms = terms
        elif self.nu == 0:
            raise UsageError("the full-time evaluator needs 2s != n")
        self.zmax = zmax
        z = np.arange(0.0, zmax + h, h)
        self._spline = CubicSpline(z, self._regular_direct(z))

    def W(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.C * z ** (-self.nu) * kv(abs(self.nu), z)
        if self.nu < 0:
            w0 = np.pi ** (self.n / 2) * gamma(self.s - self.n / 2) / gamma(self.s)
            out = np.where(z == 0, w0, out)
        return out

    def _regular_direct(self, z):
        z = np.asarray(z, dtype=float)
        if not self.singular_terms:
            return self.W(z)
        nu = self.nu
        out = np.empty_like(z)
        small = z < 1.0
        zs = z[small]
        # series: W = pref [ sum_k 2^{nu-2k} z^{2k-2nu} / (k! G(k+1-nu)) - z^{-nu} I_nu(z) ]
        acc = np.zeros_like(zs)
        for k in range(self._terms, self._terms + 30):
            acc += 2 ** (nu - 2 * k) * zs ** (2 * k - 2 * nu) / (gamma(k + 1) * gamma(k + 1 - nu))
        zi = np.zeros_like(zs)
        for k in range(30):
            zi += 2 ** (-nu - 2 * k) * zs ** (2 * k) / (gamma(k + 1) * gamma(k + 1 + nu))
        out[small] = self._pref * (acc - zi)
        zl = z[~small]
        val = self.W(zl)
        for coef, e in self.singular_terms:
            val = val - coef * zl**e
        out[~small] = val
        return out

    def regular(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        out = self._spline(np.minimum(z, self.zmax))
        far = z > self.zmax
        if np.any(far):
            tail = -sum(coef * z[far] ** e for coef, e in self.singular_terms) if self.singular_terms else 0.0
            out[far] = tail
        return out


class GaussianKernel:
    """``W`` for the weight ``w(x)^2 = exp(-|x|^2 / ell^2)`` (a smooth validation weight)."""

    singular_terms: list = []

    def __init__(self, n: int, ell: float):
        self.n, self.ell = n, float(ell)

    def W(self, z):
        z = np.asarray(z, dtype=float)
        return np.pi ** (self.n / 2) * self.ell**self.n * np.exp(-(self.ell * z) ** 2 / 4)

    regular = W


@lru_cache(maxsize=16)
def bracket_kernel(n: int, s: float) -> BracketKernel:
    return BracketKernel(n, s)


def sin_power_weights(Q: int, p: float) -> np.ndarray:
    """Product-integration weights for ``int_0^{2 pi} g(u) |2 sin((theta - u)/2)|^p du``.

    Returns the circulant first row ``R_j`` so that the integral at ``theta_i``
    is ``sum_j R_{i-j} g(theta_j)`` for trigonometric ``g`` of degree < Q/2.
    """
    k = np.arange(Q // 2 + 1)
    # c_k = (-1)^k 2 pi G(1+p) / (G(1+p/2+k) G(1+p/2-k)), built by its ratio recurrence
    c = np.empty(Q // 2 + 1)
    c[0] = 2 * np.pi * gamma(1 + p) / gamma(1 + p / 2) ** 2
    for j in range(Q // 2):
        c[j + 1] = c[j] * (j - p / 2) / (j + 1 + p / 2)
    if Q % 2 == 0:
        c[-1] *= 0.5
    d = 2 * np.pi * np.arange(Q) / Q
    return (c[0] + 2 * np.sum(c[1:, None] * np.cos(np.outer(k[1:], d)), axis=0)) / Q


# -- full-time evaluator ---------------------------------------------------------


def _radial_extent(phi: Field, B: MultiplierKind, spec: SymbolSpec, rel: float = 1e-9) -> float:
    """Largest ``a``-level on which ``B phi^`` is above ``rel`` of its maximum on the lattice."""
    H = np.abs(forward_ft(phi).values * B.on_lattice(phi.grid.xi))
    mask = H > rel * H.max()
    return float(np.max(spec.a(phi.grid.xi[mask]))) * 1.15


def _radial_rule(r_max: float, panels: int, order: int):
    t = np.linspace(0, 1, panels + 1) ** 2
    edges = r_max * t
    x, w = np.polynomial.legendre.leggauss(order)
    nodes = np.concatenate([(b - a) / 2 * x + (a + b) / 2 for a, b in zip(edges[:-1], edges[1:])])
    weights = np.concatenate([(b - a) / 2 * w for a, b in zip(edges[:-1], edges[1:])])
    return nodes, weights


def full_line_norm_sq(phi: Field, spec: SymbolSpec, B: MultiplierKind, kernel,
                      Q: int = 256, panels: int = 10, order: int = 16) -> float:
    """``int_R || w(x) B(D) e^{itp(D)} phi ||^2 dt`` with ``W = kernel`` the transform of ``w^2``.

    ``LHS^2 = (2 pi)^{1-n} int_0^inf r^{2(n-1)} / (m r^{m-1})
    int int_{Sigma(1)^2} H(r w) conj H(r w') W(r(w - w')) / (|a'(w)||a'(w')|)``,
    ``H = B phi^``.  Supports ``n`` in {1, 2}.
    """
    n, m = spec.n, spec.m
    require(n in (1, 2), "n in {1,2}", "full-time smoothing norm")
    if phi.is_zero():
        return 0.0
    r_max = _radial_extent(phi, B, spec)
    r, wr = _radial_rule(r_max, panels, order)
    if n == 1:
        omega = np.array([[1.0], [-1.0]])
        nodes = omega / spec.a(omega)[:, None]
        jac = np.ones(2)
        ga = np.abs(spec.grad_a(omega)[:, 0])
        pts = (r[:, None, None] * nodes[None]).reshape(-1, 1)
        H = (nuft_eval(phi, pts) * B(pts)).reshape(len(r), 2)
        v = H / ga
        D = np.abs(nodes[:, None, 0] - nodes[None, :, 0])
        total = 0.0
        for i, ri in enumerate(r):
            M = kernel.W(ri * D)
            total += wr[i] * np.real(v[i] @ M @ np.conj(v[i])) / (m * ri ** (m - 1))
        return float(total)
    th = 2 * np.pi * np.arange(Q) / Q
    omega = np.stack([np.cos(th), np.sin(th)], -1)
    a = spec.a(omega)
    grad = spec.grad_a(omega)
    nodes = omega / a[:, None]
    d_th = np.stack([-np.sin(th), np.cos(th)], -1)
    tang = d_th / a[:, None] - omega * (np.sum(grad * d_th, -1) / a**2)[:, None]
    jac = np.linalg.norm(tang, axis=-1)
    ga = np.linalg.norm(grad, axis=-1)
    diff = nodes[:, None, :] - nodes[None, :, :]
    D = np.linalg.norm(diff, axis=-1)
    dth = th[:, None] - th[None, :]
    sin2 = np.abs(2 * np.sin(dth / 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        S = np.where(sin2 > 0, D / np.where(sin2 > 0, sin2, 1.0), 0.0)
    S[np.diag_indices(Q)] = jac
    idx = (np.arange(Q)[:, None] - np.arange(Q)[None, :]) % Q
    sing = []
    for coef, e in kernel.singular_terms:
        sing.append((coef, e, sin_power_weights(Q, e)[idx] * S**e))
    h = 2 * np.pi / Q
    pts = (r[:, None, None] * nodes[None]).reshape(-1, 2)
    H = (nuft_eval(phi, pts) * B(pts)).reshape(len(r), Q)
    v = H * jac / ga
    total = 0.0
    for i, ri in enumerate(r):
        M = h * h * kernel.regular(ri * D)
        for coef, e, K in sing:
            M = M + h * coef * ri**e * K
        phi_r = np.real(v[i] @ M @ np.conj(v[i]))
        total += wr[i] * ri ** (2 * (n - 1)) * phi_r / (m * ri ** (m - 1))
    return float(total * (2 * np.pi) ** (1 - n))


# -- the four smoothing ratios ---------------------------------------------------------


def estimate_setup(estimate: str, spec: SymbolSpec, delta=None, enforce: bool = True):
    """Hypothesis gate; returns ``(weight exponent s, derivative multiplier)``.

    ``enforce=False`` skips the gate (negative controls).
    """
    m, n = spec.m, spec.n
    gate = require if enforce else (lambda *a, **k: None)
    if estimate not in ESTIMATES:
        raise UsageError(f"unknown estimate {estimate!r}; expected one of {ESTIMATES}")
    if estimate.startswith("I_"):
        gate(m > 1, "m>1", "TYPE-I smoothing")
        if delta is None:
            raise UsageError("TYPE-I estimates need delta")
        gate(delta > 0.5, "delta>1/2", "TYPE-I smoothing")
        order = (m - 1) / 2 if estimate == "I_homog" else m - 1
        return float(delta), homogeneous_power(order)
    gate(1 < m < n, "1<m<n", "TYPE-II smoothing")
    order = (m - 1) / 2 if estimate == "II_homog" else m - 1
    return m / 2, bracket_power(order)


def _weighted_frame_sq(values: np.ndarray, grid: GridSpec, s: float) -> np.ndarray:
    axes = tuple(range(1, values.ndim))
    return np.sum(np.abs(values * grid.bracket ** (-s)) ** 2, axis=axes) * grid.cell


def window_norm_sq(phi: Field, spec: SymbolSpec, B: MultiplierKind, s: float, time_grid: TimeGrid,
                   chunk: int = 64):
    """Trapezoid ``int_{-T}^{T} || <x>^{-s} B(D) e^{itp} phi ||^2 dt``; returns (value, integrand)."""
    H = forward_ft(phi).values * B.on_lattice(phi.grid.xi)
    p = _p_on_lattice(spec, phi.grid)
    t = time_grid.t
    integrand = np.empty(len(t))
    for start in range(0, len(t), chunk):
        tt = t[start:start + chunk]
        frames = transform_frames(np.exp(1j * np.multiply.outer(tt, p)) * H, phi.grid, inverse=True)
        integrand[start:start + chunk] = _weighted_frame_sq(frames, phi.grid, s)
    return float(np.sum(time_grid.weights * integrand)), integrand


def tail_indicator(integrand: np.ndarray, time_grid: TimeGrid, total: float) -> float:
    """``T * max(endpoint integrand) / window total``: a proxy for the truncated tail mass."""
    if total == 0:
        return 0.0
    return float(time_grid.half_span * max(integrand[0], integrand[-1]) / total)


def smoothing_ratio(data, spec: SymbolSpec, estimate: str, delta=None, *, time_grid: TimeGrid = None,
                    method: str = "window", member_id: str = "0", Q: int = 256,
                    enforce: bool = True) -> RatioReport:
    """Ratio ``LHS / RHS`` of one of the four smoothing estimates.

    ``data`` is a physical ``Field`` for the homogeneous estimates, and a
    ``SpaceTimeField`` (window method) or :class:`WaveForcing` for the Duhamel ones.
    """
    s, B = estimate_setup(estimate, spec, delta, enforce)
    params = {"m": spec.m, "n": spec.n, "symbol": spec.label(), "method": method}
    if not enforce:
        params["negative_control"] = True
    if estimate.startswith("I_"):
        params["delta"] = float(delta)
    if method not in ("window", "full"):
        raise UsageError(f"unknown method {method!r}")
    if method == "window" and time_grid is None:
        raise UsageError("the window method needs a time grid")
    homog = estimate.endswith("homog")

    if homog:
        if not isinstance(data, Field):
            raise UsageError("homogeneous estimates take a Field")
        phi = data
        if phi.is_zero():
            raise UsageError("phi must be nonzero")
        rhs = phi.norm()
        if method == "window":
            lhs2, integrand = window_norm_sq(phi, spec, B, s, time_grid)
            aux = {"tail": tail_indicator(integrand, time_grid, lhs2)}
        else:
            lhs2 = full_line_norm_sq(phi, spec, B, bracket_kernel(spec.n, s), Q=Q)
            aux = {"tail": 0.0}
        grid = grid_meta(phi.grid, **_time_meta(time_grid), Q=Q if method == "full" else 0)
        return RatioReport(estimate, member_id, float(np.sqrt(lhs2)), rhs, params, grid, aux)

    if isinstance(data, WaveForcing):
        wf = data
        if wf.psi.is_zero():
            raise UsageError("forcing must be nonzero")
        if method == "window":
            f = wf.frames(spec, time_grid)
            return _duhamel_window(f, spec, B, s, estimate, params, member_id)
        lhs2, rhs2, aux = _duhamel_full(wf, spec, B, s, Q)
        grid = grid_meta(wf.psi.grid, Q=Q, sigma=wf.sigma)
        return RatioReport(estimate, member_id, float(np.sqrt(max(lhs2, 0.0))), float(np.sqrt(rhs2)),
                           params, grid, aux)
    if isinstance(data, SpaceTimeField):
        if method == "full":
            raise UsageError("the full-time method needs a WaveForcing input")
        if data.is_zero():
            raise UsageError("forcing must be nonzero")
        return _duhamel_window(data, spec, B, s, estimate, params, member_id)
    raise UsageError("Duhamel estimates take a SpaceTimeField or WaveForcing")


def _time_meta(tg):
    return {} if tg is None else {"T": tg.half_span, "M": tg.steps}


def _duhamel_window(f, spec, B, s, estimate, params, member_id):
    g = f.grid
    G = duhamel(f, spec)
    BG = transform_frames(transform_frames(G.values, g) * B.on_lattice(g.xi), g, inverse=True)
    integrand = _weighted_frame_sq(BG, g, s)
    lhs2 = float(np.sum(f.time_grid.weights * integrand))
    rhs2 = float(np.sum(f.time_grid.weights * _weighted_frame_sq(f.values, g, -s)))
    aux = {"tail": tail_indicator(integrand, f.time_grid, lhs2)}
    grid = grid_meta(g, **_time_meta(f.time_grid))
    return RatioReport(estimate, member_id, float(np.sqrt(lhs2)), float(np.sqrt(rhs2)), params, grid, aux)


def _duhamel_full(wf: WaveForcing, spec, B, s, Q, span: float = 7.0, steps: int = 280):
    """``LHS^2 = Full/4 - int (1 - erf^2)/4 I(t) dt`` and ``RHS^2 = int chi'^2 ||<x>^s e^{itp} psi||^2``."""
    psi = wf.psi
    full = full_line_norm_sq(psi, spec, B, bracket_kernel(spec.n, s), Q=Q)
    tg = TimeGrid(span * wf.sigma, steps)
    t = tg.t
    _, I = window_norm_sq(psi, spec, B, s, tg)
    corr = np.sum(tg.weights * (1 - erf(t / wf.sigma) ** 2) / 4 * I)
    lhs2 = full / 4 - corr
    _, J = window_norm_sq(psi, spec, homogeneous_power(0), -s, tg)
    rhs2 = float(np.sum(tg.weights * wf.dchi(t) ** 2 * J))
    return float(lhs2), rhs2, {"tail": float(J[0] / J.max() * wf.dchi(t[0]) ** 2 / wf.dchi(0.0) ** 2),
                               "full": float(full)}
