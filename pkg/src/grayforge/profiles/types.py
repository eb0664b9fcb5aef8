"""Parameter records fixing one construction regime and one solution."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from ..errors import CaseMismatch


class CaseTag(str, Enum):
    """The four regimes of the boundary-value problem."""

    SPHERE_BUNDLE = "sphere-bundle"
    PROJECTIVE_SPACE = "projective-space"
    KAEHLER = "kaehler"
    PRODUCT = "product"

    @classmethod
    def parse(cls, text: str) -> "CaseTag":
        key = text.strip().lower().replace("_", "-")
        aliases = {
            "sphere": cls.SPHERE_BUNDLE,
            "sphere-bundle": cls.SPHERE_BUNDLE,
            "spherebundle": cls.SPHERE_BUNDLE,
            "cpn": cls.PROJECTIVE_SPACE,
            "projective": cls.PROJECTIVE_SPACE,
            "projective-space": cls.PROJECTIVE_SPACE,
            "projectivespace": cls.PROJECTIVE_SPACE,
            "kaehler": cls.KAEHLER,
            "kahler": cls.KAEHLER,
            "product": cls.PRODUCT,
        }
        try:
            return aliases[key]
        except KeyError:
            raise CaseMismatch(f"unknown case tag {text!r}") from None

    @property
    def uses_h_substitution(self) -> bool:
        """True for the two regimes parameterized by the rescaled h variable."""
        return self in (CaseTag.SPHERE_BUNDLE, CaseTag.PROJECTIVE_SPACE)


def parse_rational(value) -> Fraction:
    """Parse ``p/q``, an integer, or a finite decimal string into a Fraction.

    Binary floats are rejected so that a rational such as ``2/3`` can never
    silently become ``0.6666666666666666``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise CaseMismatch("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise CaseMismatch(f"refusing float {value!r}; pass the rational as a 'p/q' string")
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise CaseMismatch(f"cannot parse {value!r} as a rational") from exc


def format_rational(q: Fraction) -> str:
    """Serialize a Fraction as ``p/q`` (``p/1`` for integers)."""
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class CaseParams:
    """Discrete and rational data of one construction.

    ``n`` is the complex dimension of the total space (real dimension 2n),
    ``epsilon`` the sign of the base scalar curvature, ``A`` the constant in
    h^2 = s^2/4 + A g^2, and ``s`` the rational bundle parameter.
    """

    n: int
    epsilon: int
    A: int
    s: Fraction
    case: CaseTag

    def __post_init__(self):
        object.__setattr__(self, "s", parse_rational(self.s))
        if not isinstance(self.case, CaseTag):
            object.__setattr__(self, "case", CaseTag.parse(str(self.case)))
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 2:
            raise CaseMismatch(f"n must be an integer >= 2, got {self.n!r}")
        if self.epsilon not in (-1, 0, 1):
            raise CaseMismatch(f"epsilon must be -1, 0 or 1, got {self.epsilon!r}")
        if self.A not in (-1, 0, 1):
            raise CaseMismatch(f"A must be -1, 0 or 1, got {self.A!r}")
        if self.s < 0:
            raise CaseMismatch("s must be non-negative")
        case = self.case
        if case is CaseTag.SPHERE_BUNDLE:
            if abs(self.A) != 1 or self.s == 0:
                raise CaseMismatch("sphere-bundle case needs |A| = 1 and s > 0")
        elif case is CaseTag.PROJECTIVE_SPACE:
            if abs(self.A) != 1:
                raise CaseMismatch("projective-space case needs |A| = 1")
            if self.s != Fraction(2, self.n):
                raise CaseMismatch(f"projective-space case needs s = 2/n = 2/{self.n}")
            if self.epsilon != 1:
                raise CaseMismatch("projective-space case has base CP^(n-1), so epsilon = 1")
        elif case is CaseTag.KAEHLER:
            if self.A != 0 or self.s == 0:
                raise CaseMismatch("kaehler case needs A = 0 and s > 0")
        elif case is CaseTag.PRODUCT:
            if self.s != 0:
                raise CaseMismatch("product case needs s = 0")
            if self.A != 1:
                raise CaseMismatch("product case has h = g, which needs A = 1")

    @property
    def r(self) -> Fraction:
        return self.s / 2

    @property
    def eta(self) -> int:
        return self.epsilon * self.A

    @property
    def m(self) -> int:
        """Complex dimension of the base manifold."""
        return self.n - 1

    def to_dict(self) -> dict:
        return {
            "case": self.case.value,
            "n": self.n,
            "epsilon": self.epsilon,
            "A": self.A,
            "s": format_rational(self.s),
            "r": format_rational(self.r),
            "eta": self.eta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CaseParams":
        return cls(
            n=int(data["n"]),
            epsilon=int(data["epsilon"]),
            A=int(data["A"]),
            s=parse_rational(data["s"]),
            case=CaseTag.parse(data["case"]),
        )


@dataclass(frozen=True)
class SolutionSpec:
    """ODE constants (C, D, E) and the boundary pair x < y of one solution.

    For the two |A| = 1 regimes the constants refer to the rescaled variable
    u = h/r, with r^4 C and r^2 D already absorbed into C and D. The abscissae
    are stored in increasing order, so for the projective-space regime one of
    them equals 1 exactly.

    ``family`` carries an optional scalar labelling the member of a
    one-parameter family (the interior critical point of F for CP^n, the ratio
    c = y/x for the Kaehler and product regimes).
    """

    params: CaseParams
    C: float
    D: float
    E: float
    x: float
    y: float
    family: float | None = field(default=None)

    def __post_init__(self):
        for name in ("C", "D", "E", "x", "y"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise CaseMismatch(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        x, y = self.x, self.y
        if not x < y:
            raise CaseMismatch(f"need x < y, got x={x!r}, y={y!r}")
        case, A = self.params.case, self.params.A
        if case is CaseTag.SPHERE_BUNDLE:
            ok = (-1.0 < x and y < 1.0) if A == -1 else (1.0 < x)
            if not ok:
                raise CaseMismatch("sphere-bundle abscissae outside (-1, 1) or (1, inf)")
            # u = 0 is a removable pole of the closed form, so an interval
            # straddling it is fine; an abscissa sitting on it is not.
            if x == 0.0 or y == 0.0:
                raise CaseMismatch("an abscissa sits on the pole u = 0")
        elif case is CaseTag.PROJECTIVE_SPACE:
            if A == -1:
                ok = 0.0 < x and y == 1.0
            else:
                ok = x == 1.0 and y > 1.0
            if not ok:
                raise CaseMismatch("projective-space needs (y, 1) with 0 < y or (1, y) with y > 1")
        else:
            if not 0.0 < x:
                raise CaseMismatch("kaehler and product abscissae must be positive")

    @property
    def case(self) -> CaseTag:
        return self.params.case

    def to_dict(self) -> dict:
        out = {"C": self.C, "D": self.D, "E": self.E, "x": self.x, "y": self.y}
        if self.family is not None:
            out["family"] = self.family
        return out

    @classmethod
    def from_dict(cls, params: CaseParams, data: dict) -> "SolutionSpec":
        fam = data.get("family")
        return cls(
            params=params,
            C=float(data["C"]),
            D=float(data["D"]),
            E=float(data["E"]),
            x=float(data["x"]),
            y=float(data["y"]),
            family=None if fam is None else float(fam),
        )
