"""Parameter records, closed-form z solutions and profile reconstruction."""

from .closed_forms import eval_F, eval_F_prime, eval_z, eval_z_prime, ode_rhs
from .reconstruct import Profile, ProfileGrid, boundary_residuals, grid_identities, reconstruct_profile
from .types import CaseParams, CaseTag, SolutionSpec, format_rational, parse_rational
from .zmodel import PerturbedZModel, ZModel, zmodel_for

__all__ = [
    "CaseParams",
    "CaseTag",
    "PerturbedZModel",
    "Profile",
    "ProfileGrid",
    "SolutionSpec",
    "ZModel",
    "boundary_residuals",
    "eval_F",
    "eval_F_prime",
    "eval_z",
    "eval_z_prime",
    "format_rational",
    "grid_identities",
    "ode_rhs",
    "parse_rational",
    "reconstruct_profile",
    "zmodel_for",
]
