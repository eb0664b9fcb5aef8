"""Boundary-condition solvers and exact polynomial certification."""

from .certify import identity_suite, kaehler_existence, product_existence
from .existence import bigPhi_poly, bigPsi_poly, fcap_poly, kaehler_compat_poly, phi_poly, q_poly, x_of_c
from .polynomial import RationalPolynomial
from .solvers import (
    BoundarySearchConfig,
    cpn_solve,
    kaehler_solve,
    product_solve,
    sphere_bundle_solve,
    symmetric_solve,
)

__all__ = [
    "BoundarySearchConfig",
    "RationalPolynomial",
    "bigPhi_poly",
    "bigPsi_poly",
    "cpn_solve",
    "fcap_poly",
    "identity_suite",
    "kaehler_compat_poly",
    "kaehler_existence",
    "kaehler_solve",
    "phi_poly",
    "product_existence",
    "product_solve",
    "q_poly",
    "sphere_bundle_solve",
    "symmetric_solve",
    "x_of_c",
]
