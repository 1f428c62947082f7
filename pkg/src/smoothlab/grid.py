"""Truncated uniform lattices on R^n and the unitary Fourier transform on them.

The continuum convention is ``f^(xi) = (2 pi)^(-n/2) \\int e^{-i x.xi} f(x) dx``.
A :class:`GridSpec` samples ``[-L, L)^n`` with ``N`` points per axis; the dual
lattice is ``xi_k = k pi / L`` for ``k = -N/2 .. N/2-1``.  Frequency-tagged
fields store values in that centered order.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import UsageError

PHYSICAL = "physical"
FREQUENCY = "frequency"
_TAGS = {PHYSICAL: 0, FREQUENCY: 1}

DEFAULT_MAX_POINTS = 1 << 24


@dataclass(frozen=True)
class GridSpec:
    dimension: int
    half_width: float
    points_per_axis: int
    max_points: int = field(default=DEFAULT_MAX_POINTS, compare=False, repr=False)

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise UsageError("grid dimension must be 1, 2 or 3")
        if not self.half_width > 0:
            raise UsageError("half_width must be positive")
        N = self.points_per_axis
        if int(N) != N or N < 2 or N % 2:
            raise UsageError("points_per_axis must be an even integer >= 2")
        if N**self.dimension > self.max_points:
            raise UsageError(
                f"grid has {N}^{self.dimension} points, above the cap of {self.max_points}"
            )

    @property
    def n(self) -> int:
        return self.dimension

    @property
    def N(self) -> int:
        return self.points_per_axis

    @property
    def L(self) -> float:
        return float(self.half_width)

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dxi(self) -> float:
        return np.pi / self.L

    @property
    def nyquist(self) -> float:
        return np.pi * self.N / (2.0 * self.L)

    @property
    def cell(self) -> float:
        """Physical cell volume ``dx**n``."""
        return self.dx**self.n

    @property
    def freq_cell(self) -> float:
        return self.dxi**self.n

    @cached_property
    def x_axis(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.N)

    @cached_property
    def xi_axis(self) -> np.ndarray:
        return self.dxi * np.arange(-self.N // 2, self.N // 2)

    @cached_property
    def x(self) -> np.ndarray:
        """Physical coordinates, shape ``(N,)*n + (n,)``."""
        return _mesh(self.x_axis, self.n)

    @cached_property
    def xi(self) -> np.ndarray:
        """Frequency coordinates in centered order, shape ``(N,)*n + (n,)``."""
        return _mesh(self.xi_axis, self.n)

    @cached_property
    def r(self) -> np.ndarray:
        return np.linalg.norm(self.x, axis=-1)

    @cached_property
    def bracket(self) -> np.ndarray:
        return np.sqrt(1.0 + self.r**2)

    @cached_property
    def _phase(self) -> np.ndarray:
        # (-1)^k per axis from the -L offset of the physical lattice.
        s = (-1.0) ** np.arange(-self.N // 2, self.N // 2)
        out = s
        for _ in range(self.n - 1):
            out = np.multiply.outer(out, s)
        return out

    @cached_property
    def origin_index(self):
        return (self.N // 2,) * self.n

    def refined(self, factor=2) -> "GridSpec":
        return replace(self, points_per_axis=self.N * factor)

    def scaled(self, s) -> "GridSpec":
        return replace(self, half_width=self.L * s)

    def zeros(self, space=PHYSICAL) -> "Field":
        return Field(self, space, np.zeros(self.shape, dtype=complex))

    def sample(self, fn, space=PHYSICAL) -> "Field":
        """Evaluate ``fn`` on the lattice points (``x`` or ``xi`` coordinates)."""
        pts = self.x if space == PHYSICAL else self.xi
        return Field(self, space, np.asarray(fn(pts), dtype=complex))


def _mesh(axis, n):
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack(grids, axis=-1)


@dataclass(frozen=True, eq=False)
class Field:
    """Complex lattice samples tagged ``physical`` or ``frequency``."""

    grid: GridSpec
    space: str
    values: np.ndarray
    zero_mode_annihilated: bool = False

    def __post_init__(self):
        if self.space not in _TAGS:
            raise UsageError(f"unknown space tag {self.space!r}")
        if self.values.shape != self.grid.shape:
            raise UsageError(f"values shape {self.values.shape} does not match grid {self.grid.shape}")

    @property
    def weight(self) -> float:
        return self.grid.cell if self.space == PHYSICAL else self.grid.freq_cell

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.weight))

    def inner(self, other: "Field") -> complex:
        """Lattice L^2 pairing ``(self, other)``, linear in the first slot."""
        _same(self, other)
        return complex(np.sum(self.values * np.conj(other.values)) * self.weight)

    def with_values(self, values, **kw) -> "Field":
        return replace(self, values=np.asarray(values, dtype=complex), **kw)

    def __add__(self, other):
        _same(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        _same(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def is_zero(self) -> bool:
        return not np.any(self.values)

    # binary container ---------------------------------------------------

    def to_bytes(self) -> bytes:
        g = self.grid
        head = struct.pack("<qdqq", g.n, g.L, g.N, _TAGS[self.space])
        body = np.empty(self.values.size * 2, dtype="<f8")
        flat = self.values.ravel(order="C")
        body[0::2] = flat.real
        body[1::2] = flat.imag
        return head + body.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Field":
        n, L, N, tag = struct.unpack_from("<qdqq", data, 0)
        grid = GridSpec(int(n), float(L), int(N))
        body = np.frombuffer(data, dtype="<f8", offset=32)
        if body.size != 2 * N**n:
            raise UsageError("field container length does not match its header")
        vals = (body[0::2] + 1j * body[1::2]).reshape(grid.shape)
        space = PHYSICAL if tag == 0 else FREQUENCY
        return cls(grid, space, vals)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "Field":
        return cls.from_bytes(Path(path).read_bytes())


def _same(f, g):
    if f.grid != g.grid or f.space != g.space:
        raise UsageError("fields live on different grids or spaces")


def _check(f, space):
    if f.space != space:
        raise UsageError(f"expected a {space} field, got {f.space}")


def forward_ft(f: Field) -> Field:
    """Lattice transform matching ``(2 pi)^(-n/2) \\int e^{-ix.xi} f dx`` at ``xi_k``."""
    _check(f, PHYSICAL)
    g = f.grid
    c = g.cell / (2 * np.pi) ** (g.n / 2)
    F = np.fft.fftshift(np.fft.fftn(f.values)) * g._phase * c
    return Field(g, FREQUENCY, F, f.zero_mode_annihilated)


def inverse_ft(F: Field) -> Field:
    """Exact inverse of :func:`forward_ft` on the lattice."""
    _check(F, FREQUENCY)
    g = F.grid
    c = g.freq_cell * g.N**g.n / (2 * np.pi) ** (g.n / 2)
    f = np.fft.ifftn(np.fft.ifftshift(F.values * g._phase)) * c
    return Field(g, PHYSICAL, f, F.zero_mode_annihilated)


def transform_frames(values, grid: GridSpec, inverse=False):
    """Batch version of the transforms over a leading frame axis (raw arrays)."""
    axes = tuple(range(1, grid.n + 1))
    if not inverse:
        c = grid.cell / (2 * np.pi) ** (grid.n / 2)
        return np.fft.fftshift(np.fft.fftn(values, axes=axes), axes=axes) * grid._phase * c
    c = grid.freq_cell * grid.N**grid.n / (2 * np.pi) ** (grid.n / 2)
    return np.fft.ifftn(np.fft.ifftshift(values * grid._phase, axes=axes), axes=axes) * c


def nuft_eval(f: Field, targets, chunk: int = 2048) -> np.ndarray:
    """Direct-sum transform ``dx^n (2 pi)^(-n/2) sum_j e^{-i x_j.xi} f(x_j)`` at arbitrary ``xi``.

    The sum is contracted one axis at a time, which is the same sum in a cheaper order.
    """
    _check(f, PHYSICAL)
    g = f.grid
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if targets.shape[-1] != g.n:
        raise UsageError(f"targets must have trailing axis {g.n}")
    c = g.cell / (2 * np.pi) ** (g.n / 2)
    out = np.empty(len(targets), dtype=complex)
    xs = g.x_axis
    vals = f.values
    for start in range(0, len(targets), chunk):
        t = targets[start:start + chunk]
        E = [np.exp(-1j * np.outer(t[:, d], xs)) for d in range(g.n)]
        if g.n == 1:
            res = E[0] @ vals
        elif g.n == 2:
            res = np.einsum("kb,kb->k", E[0] @ vals, E[1])
        else:
            T = (E[0] @ vals.reshape(g.N, -1)).reshape(len(t), g.N, g.N)
            T = np.einsum("kbc,kc->kb", T, E[2])
            res = np.einsum("kb,kb->k", T, E[1])
        out[start:start + chunk] = res * c
    return out


def weighted_norm(f: Field, s: float, weight_kind: str = "japanese_bracket") -> float:
    """Lattice quadrature of ``||<x>^s f||`` or ``|| |x|^s f||``.

    For ``pure_power`` with ``s < 0`` the origin cell is left out of the sum.
    """
    _check(f, PHYSICAL)
    g = f.grid
    if weight_kind == "japanese_bracket":
        w = g.bracket**s
    elif weight_kind == "pure_power":
        w = power_weight(g, s)
    else:
        raise UsageError(f"unknown weight kind {weight_kind!r}")
    return float(np.sqrt(np.sum(np.abs(w * f.values) ** 2) * g.cell))


def power_weight(grid: GridSpec, s: float) -> np.ndarray:
    """``|x|^s`` on the lattice; the origin gets ``0`` (for ``s > 0`` that is exact)."""
    r = grid.r
    if s == 0:
        return np.ones_like(r)
    safe = np.where(r > 0, r, 1.0)
    return np.where(r > 0, safe**s, 0.0)


def gaussian(grid: GridSpec, center=None, width=1.0, modulation=None) -> Field:
    """``exp(-|x-x0|^2 / (2 width^2)) e^{i xi0.x}`` sampled on ``grid``."""
    x = grid.x
    x0 = np.zeros(grid.n) if center is None else np.asarray(center, float)
    v = np.exp(-np.sum((x - x0) ** 2, axis=-1) / (2 * width**2)).astype(complex)
    if modulation is not None:
        v = v * np.exp(1j * x @ np.asarray(modulation, float))
    return Field(grid, PHYSICAL, v)
