"""Existence polynomials in c = y/x for the Kaehler and product regimes."""

from __future__ import annotations

from fractions import Fraction

from ..profiles.types import parse_rational
from .polynomial import RationalPolynomial as RP


def _terms(terms: dict[int, object]) -> RP:
    return RP.from_terms(terms)


def phi_poly(n: int, s, epsilon: int) -> RP:
    """The Kaehler existence polynomial phi(c), coefficient by coefficient."""
    s = parse_rational(s)
    e = Fraction(epsilon)
    return _terms(
        {
            2 * n + 6: -n * (s - 2 * e),
            2 * n + 4: 4 * e * (n + 1) - n * (n + 1) * s,
            2 * n + 2: -((6 * n + 4) * e - n * n * s),
            4: -((6 * n + 4) * e + n * n * s),
            2: 4 * e * (n + 1) + n * (n + 1) * s,
            0: n * (s + 2 * e),
        }
    )


def bigPhi_poly(n: int) -> RP:
    """The epsilon-part Phi of phi = eps Phi + s Psi.

    The c^(2n+2) term pairs with c^4, mirroring how c^(2n+4) pairs with c^2;
    only then does the decomposition reproduce phi.
    """
    c = {}
    for deg, a in (
        (2 * n + 6, 2 * n),
        (2 * n + 4, 4 * (n + 1)),
        (2, 4 * (n + 1)),
        (4, -(6 * n + 4)),
        (2 * n + 2, -(6 * n + 4)),
        (0, 2 * n),
    ):
        c[deg] = c.get(deg, 0) + a
    return _terms(c)


def bigPsi_poly(n: int) -> RP:
    """The s-part Psi of phi = eps Phi + s Psi (constant term -1 inside)."""
    inner = {}
    for deg, a in (
        (2 * n + 6, 1),
        (2 * n + 4, n + 1),
        (2, -(n + 1)),
        (2 * n + 2, -n),
        (4, n),
        (0, -1),
    ):
        inner[deg] = inner.get(deg, 0) + a
    return _terms(inner).scale(-n)


def kaehler_compat_poly(n: int, s, epsilon: int) -> RP:
    """Compatibility polynomial K(c) of the four Kaehler boundary conditions.

    Eliminating C, D, E between z(x) = z(y) = 0, x z'(x) = s and y z'(y) = -s
    for the closed form z = eps/n - C g^4/(2n+4) - D g^2/(2n+2) + E g^(-2n)
    leaves, after clearing denominators and setting y = c x,

        n ((2 eps + s) + (s - 2 eps) c^4)(1 - c^(2n+2))
          - (n+1)(1 - c^2) c^2 ((4 eps + n s) + (n s - 4 eps) c^(2n)) = 0.

    For n = 2 its roots c > 1 are those of phi; for larger n they differ.
    """
    s = parse_rational(s)
    e = Fraction(epsilon)
    one = RP([1])
    c2 = RP.monomial(2)
    a = RP.from_terms({0: 2 * e + s, 4: s - 2 * e})
    b = RP.from_terms({0: 4 * e + n * s, 2 * n: n * s - 4 * e})
    return (a * (one - RP.monomial(2 * n + 2))).scale(n) - ((one - c2) * c2 * b).scale(n + 1)


def q_poly(n: int) -> RP:
    """Q(c) = c((c^(2n+1) - 1)(2n-1) + (1 - c + c^2)(1 - c^(2n-1))(2n+1))."""
    one = RP([1])
    c = RP.x()
    first = (RP.monomial(2 * n + 1) - one).scale(2 * n - 1)
    second = (one - c + RP.monomial(2)) * (one - RP.monomial(2 * n - 1))
    return c * (first + second.scale(2 * n + 1))


def numerator_x_poly(n: int) -> RP:
    """Numerator 4(1-c)(c^(2n+1)-1)(2n-1) + 2(-1+c-c^2+c^3)(c^(2n-1)-1)(2n+1) of x(c)."""
    one = RP([1])
    c = RP.x()
    first = ((one - c) * (RP.monomial(2 * n + 1) - one)).scale(4 * (2 * n - 1))
    cubic = RP([-1, 1, -1, 1])
    second = (cubic * (RP.monomial(2 * n - 1) - one)).scale(2 * (2 * n + 1))
    return first + second


def fcap_poly(n: int) -> RP:
    """F(c) = (1+c)(1-c^(2n+1))(2n-1) + (1+c^3)(c^(2n-1)-1)(2n+1)."""
    one = RP([1])
    first = (RP([1, 1]) * (one - RP.monomial(2 * n + 1))).scale(2 * n - 1)
    second = (RP([1, 0, 0, 1]) * (RP.monomial(2 * n - 1) - one)).scale(2 * n + 1)
    return first + second


def x_of_c(n: int, epsilon: int, c) -> float:
    """Left abscissa x(c) of the product regime for ratio c = y/x.

    Accepts a rational (evaluated exactly, then rounded) or a float.
    """
    if isinstance(c, float):
        num = numerator_x_poly(n).eval_float(c)
        den = (2 * n - 3) * q_poly(n).eval_float(c)
        return epsilon * num / den
    c = parse_rational(c)
    num = numerator_x_poly(n)(c)
    den = (2 * n - 3) * q_poly(n)(c)
    return float(epsilon * num / den)
