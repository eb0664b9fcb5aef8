"""Exact univariate polynomials over the rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from ..errors import GrayforgeError


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("RationalPolynomial refuses binary floats; use Fraction or int")
    return Fraction(value)


class RationalPolynomial:
    """Polynomial with Fraction coefficients, index = degree.

    Trailing zero coefficients are stripped, so the leading coefficient is
    nonzero unless the polynomial is identically zero (empty coefficient
    tuple). Instances are immutable and hashable.
    """

    __slots__ = ("_c",)

    def __init__(self, coefficients: Iterable = ()):
        c = [_frac(a) for a in coefficients]
        while c and c[-1] == 0:
            c.pop()
        self._c = tuple(c)

    # construction helpers
    @classmethod
    def monomial(cls, degree: int, coeff=1) -> "RationalPolynomial":
        return cls([0] * degree + [coeff])

    @classmethod
    def from_terms(cls, terms: dict[int, object]) -> "RationalPolynomial":
        if not terms:
            return cls()
        c = [Fraction(0)] * (max(terms) + 1)
        for deg, a in terms.items():
            c[deg] += _frac(a)
        return cls(c)

    @classmethod
    def x(cls) -> "RationalPolynomial":
        return cls([0, 1])

    # basic properties
    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return self._c

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self._c) - 1

    def is_zero(self) -> bool:
        return not self._c

    def __eq__(self, other):
        if isinstance(other, RationalPolynomial):
            return self._c == other._c
        if isinstance(other, (int, Fraction)):
            return self._c == RationalPolynomial([other])._c
        return NotImplemented

    def __hash__(self):
        return hash(self._c)

    def __repr__(self):
        return f"RationalPolynomial({[str(a) for a in self._c]})"

    def __str__(self):
        if not self._c:
            return "0"
        terms = []
        for deg in range(self.degree, -1, -1):
            a = self._c[deg]
            if a == 0:
                continue
            mono = "" if deg == 0 else ("c" if deg == 1 else f"c^{deg}")
            coeff = str(a)
            if mono and a == 1:
                coeff = ""
            elif mono and a == -1:
                coeff = "-"
            terms.append(f"{coeff}{'*' if coeff not in ('', '-') and mono else ''}{mono}")
        return " + ".join(terms).replace("+ -", "- ")

    # arithmetic
    @staticmethod
    def _coerce(other) -> "RationalPolynomial":
        if isinstance(other, RationalPolynomial):
            return other
        return RationalPolynomial([other])

    def __add__(self, other):
        other = self._coerce(other)
        a, b = self._c, other._c
        size = max(len(a), len(b))
        return RationalPolynomial(
            (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(size)
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalPolynomial(-a for a in self._c)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        a, b = self._c, other._c
        if not a or not b:
            return RationalPolynomial()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        return RationalPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = RationalPolynomial([1])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def scale(self, factor) -> "RationalPolynomial":
        f = _frac(factor)
        return RationalPolynomial(a * f for a in self._c)

    def deriv(self, order: int = 1) -> "RationalPolynomial":
        p = self
        for _ in range(order):
            p = RationalPolynomial(i * a for i, a in enumerate(p._c) if i > 0)
        return p

    def compose_shift(self, a) -> "RationalPolynomial":
        """The polynomial c -> p(c + a), computed exactly."""
        a = _frac(a)
        out = RationalPolynomial()
        shifted = RationalPolynomial([a, 1])
        for coeff in reversed(self._c):
            out = out * shifted + coeff
        return out

    # evaluation
    def __call__(self, c):
        return self.eval_horner(c)

    def eval_horner(self, c):
        """Evaluate by Horner's rule from the leading coefficient down."""
        c = _frac(c) if not isinstance(c, float) else c
        acc = 0 * c
        for a in reversed(self._c):
            acc = acc * c + a
        return acc

    def eval_ascending(self, c):
        """Evaluate by accumulating powers from the constant term up.

        Mathematically identical to :meth:`eval_horner`; on Fractions both
        orderings must return the same exact value.
        """
        c = _frac(c) if not isinstance(c, float) else c
        acc = 0 * c
        power = 1 + 0 * c
        for a in self._c:
            acc = acc + a * power
            power = power * c
        return acc

    def eval_float(self, c: float) -> float:
        acc = 0.0
        for a in reversed(self._c):
            acc = acc * c + float(a)
        return acc

    def sign_at(self, c) -> int:
        value = self.eval_horner(_frac(c))
        return (value > 0) - (value < 0)

    def taylor_at_one(self, order: int) -> list[Fraction]:
        """Derivatives p(1), p'(1), ..., p^(order)(1)."""
        out, p = [], self
        for _ in range(order + 1):
            out.append(p.eval_horner(Fraction(1)))
            p = p.deriv()
        return out

    # division
    def divmod(self, other: "RationalPolynomial"):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        rem = list(self._c)
        dq = other.degree
        lead = other._c[-1]
        quot = [Fraction(0)] * max(len(rem) - dq, 0)
        for i in range(len(rem) - dq - 1, -1, -1):
            coeff = rem[i + dq] / lead
            quot[i] = coeff
            if coeff:
                for j, b in enumerate(other._c):
                    rem[i + j] -= coeff * b
        return RationalPolynomial(quot), RationalPolynomial(rem[:dq] if dq > 0 else [])

    def divide_by_c_minus_one(self, k: int) -> "RationalPolynomial":
        """Exact quotient by (c - 1)^k; raises if the remainder is nonzero."""
        q = self
        divisor = RationalPolynomial([-1, 1])
        for step in range(k):
            q, rem = q.divmod(divisor)
            if not rem.is_zero():
                raise GrayforgeError(f"(c - 1)^{step + 1} does not divide the polynomial exactly")
        return q

    def multiplicity_at_one(self) -> int:
        if self.is_zero():
            raise ValueError("the zero polynomial has infinite multiplicity")
        k, q = 0, self
        divisor = RationalPolynomial([-1, 1])
        while True:
            quot, rem = q.divmod(divisor)
            if not rem.is_zero():
                return k
            q, k = quot, k + 1

    # real roots
    def sturm_sequence(self) -> list["RationalPolynomial"]:
        seq = [self, self.deriv()]
        while not seq[-1].is_zero():
            _, rem = seq[-2].divmod(seq[-1])
            seq.append(-rem)
        seq.pop()
        # Normalize magnitudes so coefficients stay small; signs are kept.
        return [p.scale(1 / abs(p._c[-1])) if not p.is_zero() else p for p in seq]

    @staticmethod
    def _sign_changes(values: Sequence) -> int:
        signs = [(v > 0) - (v < 0) for v in values if v != 0]
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    def count_roots(self, a, b=None) -> int:
        """Number of distinct real roots in the open interval (a, b).

        ``b=None`` means +infinity. Neither end may itself be a root; strip
        such a factor first (see :meth:`roots_above_one`).
        """
        if self.is_zero():
            raise ValueError("the zero polynomial has infinitely many roots")
        if self.eval_horner(_frac(a)) == 0 or (b is not None and self.eval_horner(_frac(b)) == 0):
            raise ValueError("an interval end is a root; divide it out first")
        seq = self.sturm_sequence()
        va = self._sign_changes([p.eval_horner(_frac(a)) for p in seq])
        if b is None:
            vb = self._sign_changes([p._c[-1] if p._c else 0 for p in seq])
        else:
            vb = self._sign_changes([p.eval_horner(_frac(b)) for p in seq])
        return va - vb

    def roots_above_one(self) -> int:
        """Number of distinct real roots in (1, +infinity)."""
        q = self.divide_by_c_minus_one(self.multiplicity_at_one())
        return q.count_roots(1)


def bisect_root(poly: RationalPolynomial, lo, hi, width=Fraction(1, 10**15), max_iter: int = 400):
    """Exact-sign bisection on [lo, hi] with sign(poly(lo)) = -sign(poly(hi)).

    Returns the rational bracket (lo, hi) of width at most ``width`` (relative
    to max(1, |lo|)); the polynomial has strictly opposite signs at its ends.
    """
    lo, hi = _frac(lo), _frac(hi)
    slo, shi = poly.sign_at(lo), poly.sign_at(hi)
    if slo == 0:
        return lo, lo
    if shi == 0:
        return hi, hi
    if slo == shi:
        raise ValueError("bracket does not straddle a sign change")
    for _ in range(max_iter):
        if hi - lo <= width * max(1, abs(lo)):
            break
        mid = (lo + hi) / 2
        # Keep denominators small by snapping the midpoint to a dyadic
        # rational with a bounded number of bits.
        mid = Fraction(round(mid * 2**60), 2**60) if mid.denominator > 2**60 else mid
        sm = poly.sign_at(mid)
        if sm == 0:
            return mid, mid
        if sm == slo:
            lo = mid
        else:
            hi = mid
    return lo, hi
