"""One row of estimate output: parameters, both sides, and diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import NumericError


@dataclass
class RatioReport:
    estimate_id: str
    member_id: str
    lhs: float
    rhs: float
    params: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    aux: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.rhs > 0:
            raise NumericError(f"{self.estimate_id}: right-hand side must be positive, got {self.rhs}")

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs

    @property
    def finite(self) -> bool:
        return math.isfinite(self.ratio)

    def as_row(self) -> dict:
        row = {"estimate_id": self.estimate_id, "member_id": self.member_id,
               "lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio}
        row.update({f"param_{k}": v for k, v in self.params.items()})
        row.update({f"grid_{k}": v for k, v in self.grid.items()})
        row.update({f"aux_{k}": v for k, v in self.aux.items()})
        return row


def grid_meta(grid, **extra) -> dict:
    meta = {"n": grid.n, "L": grid.L, "N": grid.N}
    meta.update(extra)
    return meta
