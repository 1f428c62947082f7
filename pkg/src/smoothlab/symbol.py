"""Elliptic degree-one homogeneous symbols ``a`` and the dispersive symbol ``p = a**m``.

All evaluators are vectorized over leading axes: ``xi`` has shape ``(..., n)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, UsageError

KINDS = ("euclid", "lp4", "bump", "custom")

# Step for the central-difference fallback on user profiles.
FD_STEP = 1e-5

ProfileFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SymbolSpec:
    """An elliptic symbol ``a(xi) = |xi| g(xi/|xi|)`` together with the order ``m``.

    Built-in kinds are ``euclid`` (``|xi|``), ``lp4`` (the l^4 norm) and
    ``bump`` (``|xi| (1 + epsilon * omega_1**2)``).  ``custom`` takes a profile
    ``g`` on the unit sphere and optionally its tangential gradient.
    """

    dimension: int
    order: float = 2.0
    kind: str = "euclid"
    epsilon: float = 0.0
    profile: Optional[ProfileFn] = field(default=None, compare=False)
    profile_gradient: Optional[ProfileFn] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError(f"unknown symbol kind {self.kind!r}; expected one of {KINDS}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise UsageError("dimension must be an integer >= 1")
        if not self.order > 1:
            raise UsageError("requires m>1", hypothesis="m>1")
        if self.kind == "bump" and not self.epsilon > -1:
            raise UsageError("bump symbol is elliptic only for epsilon > -1")
        if self.kind == "custom" and self.profile is None:
            raise UsageError("custom symbol needs a profile")

    @property
    def n(self) -> int:
        return int(self.dimension)

    @property
    def m(self) -> float:
        return float(self.order)

    def label(self) -> str:
        if self.kind == "bump":
            return f"bump({self.epsilon:g})"
        return self.kind

    # -- a and its gradient -------------------------------------------------

    def a(self, xi) -> np.ndarray:
        xi = _as_points(xi, self.n)
        if self.kind == "euclid":
            return np.linalg.norm(xi, axis=-1)
        if self.kind == "lp4":
            return np.sum(xi**4, axis=-1) ** 0.25
        r = np.linalg.norm(xi, axis=-1)
        if self.kind == "bump":
            safe = np.where(r > 0, r, 1.0)
            return np.where(r > 0, r + self.epsilon * xi[..., 0] ** 2 / safe, 0.0)
        safe = np.where(r > 0, r, 1.0)
        omega = xi / safe[..., None]
        return np.where(r > 0, r * self.profile(omega), 0.0)

    def grad_a(self, xi) -> np.ndarray:
        xi = _as_points(xi, self.n)
        r = np.linalg.norm(xi, axis=-1)
        if np.any(r == 0):
            raise DomainError("a'(xi) is undefined at xi = 0")
        if self.kind == "euclid":
            return xi / r[..., None]
        if self.kind == "lp4":
            s = np.sum(xi**4, axis=-1)
            return xi**3 / (s ** 0.75)[..., None]
        if self.kind == "bump":
            x1 = xi[..., 0]
            g = xi / r[..., None] * (1.0 - self.epsilon * (x1 / r) ** 2)[..., None]
            g[..., 0] += 2.0 * self.epsilon * x1 / r
            return g
        omega = xi / r[..., None]
        return self.profile(omega)[..., None] * omega + self._tangential_gradient(omega)

    def _tangential_gradient(self, omega):
        if self.profile_gradient is not None:
            return np.asarray(self.profile_gradient(omega), dtype=float)
        # Degree-zero extension G(xi) = g(xi/|xi|); its gradient on the sphere is tangential.
        def G(x):
            return self.profile(x / np.linalg.norm(x, axis=-1, keepdims=True))

        grad = np.empty_like(omega)
        for i in range(self.n):
            e = np.zeros(self.n)
            e[i] = FD_STEP
            grad[..., i] = (G(omega + e) - G(omega - e)) / (2 * FD_STEP)
        return grad

    # -- p = a**m -----------------------------------------------------------

    def p(self, xi) -> np.ndarray:
        return self.a(xi) ** self.m

    def grad_p(self, xi) -> np.ndarray:
        a = self.a(xi)
        return (self.m * a ** (self.m - 1))[..., None] * self.grad_a(xi)

    def g(self, omega) -> np.ndarray:
        """The profile on the unit sphere, ``a(omega)`` for ``|omega| = 1``."""
        return self.a(omega)


def _as_points(xi, n):
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0 or xi.shape[-1] != n:
        raise UsageError(f"expected points with trailing axis of length {n}, got shape {xi.shape}")
    return xi


def euclid(n, m=2.0) -> SymbolSpec:
    return SymbolSpec(n, m, "euclid")


def lp4(n, m=2.0) -> SymbolSpec:
    return SymbolSpec(n, m, "lp4")


def bump(n, epsilon, m=2.0) -> SymbolSpec:
    return SymbolSpec(n, m, "bump", epsilon=epsilon)


def custom(n, profile, m=2.0, profile_gradient=None) -> SymbolSpec:
    return SymbolSpec(n, m, "custom", profile=profile, profile_gradient=profile_gradient)


def from_config(kind, n, m, epsilon=0.0) -> SymbolSpec:
    """Build a named symbol from harness configuration values."""
    if kind == "custom":
        raise UsageError("custom profiles are library-only")
    return SymbolSpec(int(n), float(m), kind, epsilon=float(epsilon))


# -- module-level operations -------------------------------------------------


def eval_a(spec: SymbolSpec, xi):
    """``a(xi)``; zero at the origin."""
    return spec.a(xi)


def eval_grad_a(spec: SymbolSpec, xi):
    """``a'(xi)`` for nonzero ``xi``; raises :class:`DomainError` at the origin."""
    return spec.grad_a(xi)


def eval_p(spec: SymbolSpec, xi, gradient=True):
    """Return ``(p(xi), p'(xi))``; the gradient is ``None`` where ``xi = 0`` for a single point.

    For a batch containing the origin, request ``gradient=False`` or filter first.
    """
    xi = _as_points(xi, spec.n)
    value = spec.p(xi)
    if not gradient:
        return value, None
    if xi.ndim == 1 and not np.any(xi):
        return value, None
    return value, spec.grad_p(xi)


def homogeneity_residual(spec: SymbolSpec, sample_count: int, seed: int = 0) -> float:
    """Max relative defect of degree-one homogeneity plus max Euler-identity defect."""
    if sample_count < 1:
        raise UsageError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal((sample_count, spec.n))
    xi *= rng.uniform(0.1, 10.0, size=(sample_count, 1))
    a = spec.a(xi)
    hom = 0.0
    for t in (0.5, 2.0, 7.0):
        at = spec.a(t * xi)
        hom = max(hom, float(np.max(np.abs(at - t * a) / at)))
    euler = np.abs(a - np.sum(spec.grad_a(xi) * xi, axis=-1)) / a
    return hom + float(np.max(euler))
