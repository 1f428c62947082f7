"""Test families, the estimate registry, reports and the command line."""
from .family import BASES, FamilySpec, Member, make_family, spectral_gaussian
from .registry import REGISTRY, Estimate, Outcome, get, identity_ids

__all__ = ["BASES", "FamilySpec", "Member", "make_family", "spectral_gaussian", "REGISTRY", "Estimate",
           "Outcome", "get", "identity_ids"]
