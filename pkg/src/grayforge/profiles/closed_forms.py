"""Closed-form solutions of the linear first-order ODE for z in each regime.

The functions here follow the textbook formulas literally, poles included.
A pole-free factored form of the same functions, suitable for evaluation at
the collapsing end of CP^n and across u = 0, lives in :mod:`.zmodel`.
"""

from __future__ import annotations

from math import comb

import numpy as np

from ..errors import CaseMismatch, DomainError
from .types import CaseTag, SolutionSpec


def _as_array(u):
    arr = np.asarray(u, dtype=float)
    return arr, arr.ndim == 0


def _finish(value, scalar):
    return float(value) if scalar else value


def odd_series(m: int, t):
    """-1/t + sum_{k=1}^m (-1)^k binom(m, k) t^(2k-1)/(2k-1).

    This is the antiderivative of (1 - t^2)^m / t^2 that vanishes in no
    particular normalization; it is the building block of F.
    """
    t = np.asarray(t, dtype=float)
    out = -1.0 / t
    for k in range(1, m + 1):
        out = out + (-1) ** k * comb(m, k) * t ** (2 * k - 1) / (2 * k - 1)
    return out


def _require_h_case(spec: SolutionSpec):
    if not spec.params.case.uses_h_substitution:
        raise CaseMismatch(f"F is only defined for |A| = 1 regimes, not {spec.params.case.value}")


def _require_domain(u, spec: SolutionSpec):
    case = spec.params.case
    if case.uses_h_substitution:
        if np.any(u == 0.0) or np.any(np.abs(u) == 1.0):
            raise DomainError("u = 0 and u = +-1 are poles of the |A| = 1 closed form")
    elif np.any(u <= 0.0):
        raise DomainError("the kaehler and product closed forms need u > 0")


def eval_F(t, spec: SolutionSpec):
    """Evaluate the antiderivative F(t) of the |A| = 1 regimes."""
    _require_h_case(spec)
    t, scalar = _as_array(t)
    if np.any(t == 0.0):
        raise DomainError("F has a pole at t = 0")
    n, eta = spec.params.n, spec.params.eta
    value = (
        2 * eta * odd_series(n - 1, t)
        + spec.C * odd_series(n + 1, t)
        + spec.D * odd_series(n, t)
        + spec.E
    )
    return _finish(value, scalar)


def eval_F_prime(t, spec: SolutionSpec):
    """F'(t) = (1 - t^2)^(n-1)/t^2 * (2 eta + C (1 - t^2)^2 + D (1 - t^2))."""
    _require_h_case(spec)
    t, scalar = _as_array(t)
    if np.any(t == 0.0):
        raise DomainError("F' has a pole at t = 0")
    n, eta = spec.params.n, spec.params.eta
    a = 1.0 - t * t
    value = a ** (n - 1) / (t * t) * (2 * eta + spec.C * a * a + spec.D * a)
    return _finish(value, scalar)


def eval_z(u, spec: SolutionSpec):
    """Closed-form solution z of the regime's ODE."""
    u, scalar = _as_array(u)
    _require_domain(u, spec)
    p = spec.params
    n, eps = p.n, p.epsilon
    C, D, E = spec.C, spec.D, spec.E
    if p.case.uses_h_substitution:
        value = eval_F(u, spec) * u / (1.0 - u * u) ** (n - 1)
    elif p.case is CaseTag.KAEHLER:
        value = eps / n - C * u**4 / (2 * n + 4) - D * u**2 / (2 * n + 2) + E / u ** (2 * n)
    else:
        value = (
            2 * eps / (2 * n - 3)
            - C * u**4 / (2 * n + 1)
            - D * u**2 / (2 * n - 1)
            + E / u ** (2 * n - 3)
        )
    return _finish(value, scalar)


def eval_z_prime(u, spec: SolutionSpec):
    """Exact derivative of :func:`eval_z` in its own variable."""
    u, scalar = _as_array(u)
    _require_domain(u, spec)
    p = spec.params
    n = p.n
    C, D, E = spec.C, spec.D, spec.E
    if p.case.uses_h_substitution:
        a = 1.0 - u * u
        w = u / a ** (n - 1)
        w_prime = 1.0 / a ** (n - 1) + 2 * (n - 1) * u * u / a**n
        value = eval_F_prime(u, spec) * w + eval_F(u, spec) * w_prime
    elif p.case is CaseTag.KAEHLER:
        value = (
            -4 * C * u**3 / (2 * n + 4)
            - 2 * D * u / (2 * n + 2)
            - 2 * n * E / u ** (2 * n + 1)
        )
    else:
        value = (
            -4 * C * u**3 / (2 * n + 1)
            - 2 * D * u / (2 * n - 1)
            - (2 * n - 3) * E / u ** (2 * n - 2)
        )
    return _finish(value, scalar)


def ode_rhs(u, z, spec: SolutionSpec):
    """Right-hand side z' = R(u, z) of the regime's linear ODE.

    The Kaehler equation is used in the form z' + 2n z/g = 2 eps/g - C g^3 - D g,
    the one actually solved by the closed form.
    """
    u, scalar = _as_array(u)
    z = np.asarray(z, dtype=float)
    _require_domain(u, spec)
    p = spec.params
    n, eps = p.n, p.epsilon
    C, D = spec.C, spec.D
    if p.case.uses_h_substitution:
        a = 1.0 - u * u
        value = (
            z * (1.0 + (2 * n - 3) * u * u) / (u * a)
            + (2 * p.eta + C * a * a + D * a) / u
        )
    elif p.case is CaseTag.KAEHLER:
        value = -2 * n * z / u + 2 * eps / u - C * u**3 - D * u
    else:
        value = -(2 * n - 3) * z / u + 2 * eps / u - C * u**3 - D * u
    return _finish(value, scalar)


def unscaled_constants(spec: SolutionSpec) -> tuple[float, float, float]:
    """Constants (C, D, E) of the h-variable equation for an |A| = 1 spec.

    The rescaled constants satisfy C_rescaled = r^4 C and D_rescaled = r^2 D;
    the additive constant of the h-variable antiderivative is r^(2n-3) E.
    """
    _require_h_case(spec)
    r = float(spec.params.r)
    n = spec.params.n
    return spec.C / r**4, spec.D / r**2, spec.E * r ** (2 * n - 3)


def _odd_series_h(m: int, h, r: float):
    out = -(r ** (2 * m)) / h
    for k in range(1, m + 1):
        out = out + (-1) ** k * comb(m, k) * r ** (2 * (m - k)) * h ** (2 * k - 1) / (2 * k - 1)
    return out


def eval_z_h(h, spec: SolutionSpec):
    """z as a function of the unrescaled variable h = r u.

    Uses the antiderivative of (r^2 - h^2)^(n-1)/h^2 (2 eta + C (r^2-h^2)^2 +
    D (r^2 - h^2)) built directly in h with the unscaled constants, so that
    agreement with ``eval_z(h / r)`` is a genuine consistency check.
    """
    _require_h_case(spec)
    h, scalar = _as_array(h)
    r = float(spec.params.r)
    n, eta = spec.params.n, spec.params.eta
    if np.any(h == 0.0) or np.any(np.abs(h) == r):
        raise DomainError("h = 0 and h = +-r are poles")
    C, D, E = unscaled_constants(spec)
    G = 2 * eta * _odd_series_h(n - 1, h, r) + C * _odd_series_h(n + 1, h, r) + D * _odd_series_h(n, h, r) + E
    value = G * h / (r * r - h * h) ** (n - 1)
    return _finish(value, scalar)


def mu_coefficients(spec: SolutionSpec) -> tuple[float, float]:
    """(C_g, D_g) with mu = C_g g^2 + D_g for the solution ``spec``."""
    p = spec.params
    if p.case.uses_h_substitution:
        r = float(p.r)
        # mu = C_h (r^2 - h^2) + D_h and r^2 - h^2 = -A g^2.
        return -p.A * spec.C / r**4, spec.D / r**2
    return spec.C, spec.D


def slope_targets(spec: SolutionSpec) -> tuple[float, float]:
    """Values of z' required at x and at y by the smoothness conditions.

    For the Kaehler regime the condition is x z'(x) = s and y z'(y) = -s, so
    the targets depend on the abscissae.
    """
    p = spec.params
    if p.case.uses_h_substitution:
        r = float(p.r)
        return 2 * r, -2 * r
    if p.case is CaseTag.KAEHLER:
        s = float(p.s)
        return s / spec.x, -s / spec.y
    return 2.0, -2.0
