"""Spectral numerics for smoothing, resolvent and restriction estimates of dispersive multipliers.

Modules: ``symbol`` (homogeneous elliptic symbols), ``grid`` (lattices and
transforms), ``multiplier`` (Fourier multipliers and weighted inequalities),
``evolution`` (propagators, Duhamel integrals, smoothing ratios), ``resolvent``
(resolvent forms and limiting absorption), ``trace`` (level-set restriction),
and ``harness`` (families, registry, CLI).
"""
from .errors import ConfigError, DomainError, NumericError, SmoothlabError, UsageError
from .grid import FREQUENCY, PHYSICAL, Field, GridSpec, forward_ft, inverse_ft
from .report import RatioReport
from .symbol import SymbolSpec, bump, custom, euclid, lp4

__version__ = "0.1.0"
__all__ = ["ConfigError", "DomainError", "NumericError", "SmoothlabError", "UsageError", "FREQUENCY", "PHYSICAL",
           "Field", "GridSpec", "forward_ft", "inverse_ft", "RatioReport", "SymbolSpec", "bump", "custom", "euclid",
           "lp4"]
