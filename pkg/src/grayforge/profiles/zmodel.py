"""Pole-free representation of z with analytic derivatives up to order three.

Each closed-form solution is written as

    z(u) = P(u - shift) * prod_j (alpha_j + beta_j u)^(p_j)

with P a polynomial. Removable singularities of the literal formulas (u = 0
for the |A| = 1 regimes, u = 1 at the collapsing end of CP^n) disappear in
this form, and the factor (1 - u) is kept separate so that z is accurate to
full relative precision next to that end.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from numpy.polynomial import Polynomial

from ..errors import CaseMismatch
from .types import CaseTag, SolutionSpec

ORDER = 3


def _leibniz(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Derivatives 0..3 of a product from the derivatives of its factors."""
    out = np.empty_like(a)
    for k in range(ORDER + 1):
        out[k] = sum(comb(k, j) * a[j] * b[k - j] for j in range(k + 1))
    return out


def _power_derivs(alpha: float, beta: float, p: int, u: np.ndarray) -> np.ndarray:
    base = alpha + beta * u
    out = np.empty((ORDER + 1,) + u.shape)
    coeff = 1.0
    for k in range(ORDER + 1):
        out[k] = coeff * beta**k * base ** (p - k) if coeff != 0.0 else 0.0
        coeff *= p - k
    return out


@dataclass(frozen=True)
class ZModel:
    """Factored z with exact derivatives; see the module docstring."""

    poly: Polynomial
    factors: tuple[tuple[float, float, int], ...] = ()
    shift: float = 0.0

    def __post_init__(self):
        chain = [self.poly]
        for _ in range(ORDER):
            chain.append(chain[-1].deriv())
        object.__setattr__(self, "_chain", tuple(c.coef[::-1].copy() for c in chain))

    def derivs(self, u) -> np.ndarray:
        """Array of shape (4, ...) holding z, z', z'', z''' at ``u``."""
        u = np.asarray(u, dtype=float)
        w = u - self.shift
        out = np.empty((ORDER + 1,) + u.shape)
        for k, coef in enumerate(self._chain):
            out[k] = np.polyval(coef, w)
        for alpha, beta, p in self.factors:
            out = _leibniz(out, _power_derivs(alpha, beta, p, u))
        return out

    def __call__(self, u):
        return self.derivs(u)[0]


@dataclass(frozen=True)
class PerturbedZModel:
    """z multiplied by 1 + a sin(k pi (u - x)/(y - x)).

    The factor equals 1 at both abscissae, so zeros stay simple and the slope
    conditions survive, while the Gray condition is destroyed. Used only for
    negative controls.
    """

    base: ZModel
    amplitude: float
    x: float
    y: float
    k: int = 1

    def derivs(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        om = self.k * np.pi / (self.y - self.x)
        ph = om * (u - self.x)
        a = self.amplitude
        w = np.stack(
            [
                1.0 + a * np.sin(ph),
                a * om * np.cos(ph),
                -a * om**2 * np.sin(ph),
                -a * om**3 * np.cos(ph),
            ]
        )
        return _leibniz(self.base.derivs(u), w)

    def __call__(self, u):
        return self.derivs(u)[0]


def _even_series(m: int) -> Polynomial:
    """u * odd_series(m, u) as a polynomial: -1 + sum (-1)^k C(m,k) u^(2k)/(2k-1)."""
    coef = np.zeros(2 * m + 1)
    coef[0] = -1.0
    for k in range(1, m + 1):
        coef[2 * k] = (-1) ** k * comb(m, k) / (2 * k - 1)
    return Polynomial(coef)


def _uF_polynomial(spec: SolutionSpec) -> Polynomial:
    n, eta = spec.params.n, spec.params.eta
    return (
        2 * eta * _even_series(n - 1)
        + spec.C * _even_series(n + 1)
        + spec.D * _even_series(n)
        + Polynomial([0.0, spec.E])
    )


def zmodel_for(spec: SolutionSpec) -> ZModel:
    """Build the factored representation of the closed-form z of ``spec``."""
    p = spec.params
    n, eps = p.n, p.epsilon
    C, D, E = spec.C, spec.D, spec.E
    if p.case is CaseTag.SPHERE_BUNDLE:
        return ZModel(_uF_polynomial(spec), ((1.0, -1.0, -(n - 1)), (1.0, 1.0, -(n - 1))))
    if p.case is CaseTag.PROJECTIVE_SPACE:
        shifted = _uF_polynomial(spec)(Polynomial([1.0, 1.0]))
        c = np.zeros(2 * n + 3)
        c[: len(shifted.coef)] = shifted.coef
        scale = max(1.0, float(np.max(np.abs(c))))
        # u F(u) must vanish to order n at u = 1 once E = -F(1); the low
        # coefficients are round-off and are dropped.
        if np.max(np.abs(c[:n])) > 1e-8 * scale:
            raise CaseMismatch("constants do not make u F(u) vanish to order n at u = 1")
        # z = (1 - u) * R(u - 1) * (1 + u)^(1 - n) with R as below.
        R = Polynomial((-1) ** n * c[n:])
        return ZModel(R, ((1.0, -1.0, 1), (1.0, 1.0, -(n - 1))), shift=1.0)
    if p.case is CaseTag.KAEHLER:
        coef = np.zeros(2 * n + 5)
        coef[0] = E
        coef[2 * n] = eps / n
        coef[2 * n + 2] = -D / (2 * n + 2)
        coef[2 * n + 4] = -C / (2 * n + 4)
        return ZModel(Polynomial(coef), ((0.0, 1.0, -2 * n),))
    coef = np.zeros(2 * n + 2)
    coef[0] = E
    coef[2 * n - 3] = 2 * eps / (2 * n - 3)
    coef[2 * n - 1] = -D / (2 * n - 1)
    coef[2 * n + 1] = -C / (2 * n + 1)
    return ZModel(Polynomial(coef), ((0.0, 1.0, -(2 * n - 3)),))
