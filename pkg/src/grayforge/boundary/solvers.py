"""Boundary-condition solvers producing validated SolutionSpec values."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from ..errors import (
    CaseMismatch,
    DomainError,
    InadmissibleC,
    NoRoot,
    PositivityViolation,
    ResidualFailure,
    SingularSystem,
)
from ..profiles.closed_forms import odd_series
from ..profiles.reconstruct import boundary_residuals
from ..profiles.types import CaseParams, CaseTag, SolutionSpec, parse_rational
from ..profiles.zmodel import zmodel_for
from .existence import fcap_poly, kaehler_compat_poly, x_of_c
from .polynomial import RationalPolynomial, bisect_root

RESIDUAL_TOL = 1e-10
SCAN_POINTS = 1000


@dataclass(frozen=True)
class BoundarySearchConfig:
    """Bracketing and tolerance settings shared by all solvers."""

    bracketMax: float = 50.0
    tolAbs: float = 1e-12
    maxIter: int = 200

    def __post_init__(self):
        if not self.bracketMax > 1:
            raise CaseMismatch("bracketMax must exceed 1")
        if not self.tolAbs > 0:
            raise CaseMismatch("tolAbs must be positive")
        if self.maxIter < 1:
            raise CaseMismatch("maxIter must be positive")


@dataclass(frozen=True)
class RootCertificate:
    """Rational bracket lo <= root <= hi with strict opposite signs at the ends."""

    lo: Fraction
    hi: Fraction
    sign_lo: int
    sign_hi: int

    @property
    def value(self) -> float:
        return float((self.lo + self.hi) / 2)


# shared validation
def positivity_scan(spec: SolutionSpec, model=None, points: int = SCAN_POINTS) -> float:
    """Minimum of z over ``points`` interior samples; raises if not positive."""
    model = model if model is not None else zmodel_for(spec)
    u = np.linspace(spec.x, spec.y, points + 2)[1:-1]
    zmin = float(np.min(model(u)))
    if not zmin > 0:
        raise PositivityViolation(f"z dips to {zmin:.3g} inside (x, y)")
    return zmin


def check_residuals(spec: SolutionSpec, tol: float = RESIDUAL_TOL) -> dict[str, float]:
    res = boundary_residuals(spec)
    worst = max(abs(v) for v in res.values())
    if not worst < tol:
        raise ResidualFailure(f"boundary residual {worst:.3g} exceeds {tol:.1e}: {res}")
    return res


def _validated(spec: SolutionSpec) -> SolutionSpec:
    check_residuals(spec)
    positivity_scan(spec)
    return spec


# exact root isolation
def smallest_root_above_one(poly: RationalPolynomial, cfg: BoundarySearchConfig) -> RootCertificate:
    """Certified bracket of the smallest sign change of ``poly`` on (1, bracketMax).

    Sign evaluations are exact. Roots of even multiplicity (no sign change)
    are not reported, matching the requirement that z change sign there.
    """
    q = poly.divide_by_c_minus_one(poly.multiplicity_at_one())
    hi_end = Fraction(cfg.bracketMax).limit_denominator(10**6)
    if q.sign_at(hi_end) != 0 and q.count_roots(1, hi_end) == 0:
        raise NoRoot(f"no root in (1, {cfg.bracketMax})")
    steps = 4000
    prev_c = Fraction(1)
    prev_s = _sign_right_of_one(q)
    for j in range(1, steps + 1):
        c = 1 + (hi_end - 1) * Fraction(j * j, steps * steps)
        sc = q.sign_at(c)
        if sc == 0:
            return RootCertificate(c, c, 0, 0)
        if sc != prev_s:
            width = min(Fraction(cfg.tolAbs), Fraction(1, 2**53))
            lo, hi = bisect_root(q, prev_c, c, width=width)
            return RootCertificate(lo, hi, q.sign_at(lo), q.sign_at(hi))
        prev_c, prev_s = c, sc
    raise NoRoot(f"no sign change in (1, {cfg.bracketMax})")


def _sign_right_of_one(q: RationalPolynomial) -> int:
    s = q.sign_at(1)
    if s != 0:
        return s
    raise ValueError("factor (c - 1) was not removed")


# Kaehler regime
def kaehler_constants(n: int, s, epsilon: int, x: float, y: float) -> tuple[float, float, float]:
    """C, D, E from z(x) = 0, x z'(x) = s, y z'(y) = -s.

    D uses the displayed elimination formula; C follows from the slope at x
    for the closed form actually satisfying z' + 2n z/g = 2 eps/g - C g^3 - D g,
    which reads C = (2 eps - s - D x^2)/x^4.
    """
    s = float(parse_rational(s))
    e = epsilon
    D = (2 * e * x**4 + s * x**4 - 2 * e * y**4 + s * y**4) / ((x * x - y * y) * x * x * y * y)
    C = (2 * e - s - D * x * x) / x**4
    E = -(x ** (2 * n)) * (4 * e + 4 * e * n + n * s + n * n * s - D * n * x * x) / (
        2 * n * (1 + n) * (2 + n)
    )
    return C, D, E


def kaehler_root(n: int, s, epsilon: int = 1, cfg: BoundarySearchConfig | None = None) -> RootCertificate:
    """Certified smallest root c0 > 1 of the Kaehler compatibility polynomial."""
    cfg = cfg or BoundarySearchConfig()
    return smallest_root_above_one(kaehler_compat_poly(n, s, epsilon), cfg)


def kaehler_solve(
    n: int, s, x: float = 1.0, cfg: BoundarySearchConfig | None = None, epsilon: int = 1
) -> SolutionSpec:
    """Solve the Kaehler boundary problem on (x, c0 x)."""
    cfg = cfg or BoundarySearchConfig()
    s = parse_rational(s)
    if not x > 0:
        raise DomainError("kaehler abscissa x must be positive")
    params = CaseParams(n=n, epsilon=epsilon, A=0, s=s, case=CaseTag.KAEHLER)
    cert = kaehler_root(n, s, epsilon, cfg)
    c0 = cert.value
    y = c0 * x
    C, D, E = kaehler_constants(n, s, epsilon, x, y)
    spec = SolutionSpec(params, C, D, E, x, y, family=c0)
    return _validated(spec)


# |A| = 1 sphere-bundle regime
def _slope_constants(n, eta, r, x, y):
    """C, D from the two slope conditions with z0(x) = z0(y) = 0."""
    a, b = 1.0 - x * x, 1.0 - y * y
    det = a * a * b - b * b * a
    if abs(det) <= 1e-300 or not np.isfinite(det):
        raise SingularSystem("slope system singular (y = +-x or an abscissa at +-1)")
    ra = 2 * r * x - 2 * eta
    rb = -2 * r * y - 2 * eta
    C = (ra * b - rb * a) / det
    D = (a * a * rb - b * b * ra) / det
    return C, D


def _Ftilde(u, n, eta, C, D):
    return 2 * eta * odd_series(n - 1, u) + C * odd_series(n + 1, u) + D * odd_series(n, u)


def sphere_bundle_constants(n: int, eta: int, r, x: float, y: float) -> tuple[float, float, float]:
    """(C, D, E) of the rescaled problem for a trial pair (x, y)."""
    r = float(parse_rational(r))
    C, D = _slope_constants(n, eta, r, x, y)
    E = -float(_Ftilde(x, n, eta, C, D))
    return C, D, E


def curve_residual(n: int, eta: int, r, x: float, y: float) -> float:
    """F(x) - F(y) with C, D eliminated by the slope conditions.

    Its zeros with y != +-x are the admissible boundary pairs.
    """
    r = float(parse_rational(r))
    C, D = _slope_constants(n, eta, r, x, y)
    return float(_Ftilde(x, n, eta, C, D) - _Ftilde(y, n, eta, C, D))


def _sphere_params(n, eta, r, A):
    if A not in (-1, 1):
        raise CaseMismatch("sphere-bundle needs A = +-1")
    if eta not in (-1, 0, 1) or (eta != 0 and eta * A not in (-1, 1)):
        raise CaseMismatch("eta must be in {-1, 0, 1}")
    epsilon = eta * A
    return CaseParams(n=n, epsilon=epsilon, A=A, s=2 * parse_rational(r), case=CaseTag.SPHERE_BUNDLE)


def symmetric_solve(n: int, eta: int, r, x: float) -> SolutionSpec:
    """Symmetric solution y = -x, E = 0, for A = -1 and -1 < x < 0."""
    params = _sphere_params(n, eta, r, -1)
    if not -1.0 < x < 0.0:
        raise DomainError("symmetric solve needs -1 < x < 0")
    rf = float(params.r)
    a = 1.0 - x * x
    alpha = (2 * rf * x - 2 * eta) / (a * a)
    beta = 1.0 / a
    Sn1, Sn, Sn2 = (float(odd_series(m, x)) for m in (n - 1, n, n + 1))
    denom = Sn - beta * Sn2
    if abs(denom) <= 1e-14 * (abs(Sn) + abs(beta * Sn2)):
        raise SingularSystem("coefficient of D vanishes in the symmetric system")
    D = -(2 * eta * Sn1 + alpha * Sn2) / denom
    C = (2 * rf * x - 2 * eta - D * a) / (a * a)
    spec = SolutionSpec(params, C, D, 0.0, x, -x)
    return _validated(spec)


def sphere_bundle_candidates(
    n: int, eta: int, r, x: float, A: int, cfg: BoundarySearchConfig | None = None
) -> list[SolutionSpec]:
    """All admissible solutions found for the given left abscissa x.

    Scans y on (x, 1) for A = -1 or (x, bracketMax) for A = +1, on both sides
    of -x, refines sign changes of the curve residual, and keeps the roots
    that pass the residual and positivity checks. For A = -1 with x < 0 the
    symmetric solution y = -x, which the curve residual cannot see, is tried
    too. Sorted by y.
    """
    cfg = cfg or BoundarySearchConfig()
    params = _sphere_params(n, eta, r, A)
    if x == 0.0:
        raise DomainError("x = 0 is a pole of the closed form")
    if A == -1 and not -1.0 < x < 1.0:
        raise DomainError("A = -1 needs -1 < x < 1")
    if A == 1 and not x > 1.0:
        raise DomainError("A = +1 needs x > 1")
    hi = 1.0 if A == -1 else float(cfg.bracketMax)
    span = hi - x
    ys = x + span * (np.linspace(0.0, 1.0, 6001)[1:-1] ** 1.5)
    keep = np.abs(ys - x) > 1e-3 * span
    keep &= np.abs(ys) > 1e-9
    keep &= np.abs(ys + x) > 1e-9 * max(1.0, abs(x))
    ys = ys[keep]

    def G(yv):
        try:
            return curve_residual(n, eta, r, x, yv)
        except SingularSystem:
            return np.nan

    vals = np.array([G(v) for v in ys])
    found: list[SolutionSpec] = []
    for i in range(len(ys) - 1):
        g0, g1 = vals[i], vals[i + 1]
        if not (np.isfinite(g0) and np.isfinite(g1)) or np.sign(g0) == np.sign(g1):
            continue
        # A crossing through 0 or -x is a pole, not a root.
        if (ys[i] < 0.0 < ys[i + 1]) or (ys[i] < -x < ys[i + 1]):
            continue
        try:
            y = brentq(G, ys[i], ys[i + 1], xtol=cfg.tolAbs, rtol=1e-15, maxiter=cfg.maxIter)
            C, D, E = sphere_bundle_constants(n, eta, r, x, y)
            found.append(_validated(SolutionSpec(params, C, D, E, x, y)))
        except (ValueError, SingularSystem, ResidualFailure, PositivityViolation, CaseMismatch):
            continue
    if A == -1 and x < 0.0:
        try:
            found.append(symmetric_solve(n, eta, r, x))
        except (SingularSystem, ResidualFailure, PositivityViolation):
            pass
    return sorted(found, key=lambda sp: sp.y)


def sphere_bundle_solve(
    n: int, eta: int, r, x: float, A: int, cfg: BoundarySearchConfig | None = None
) -> SolutionSpec:
    """Smallest admissible y for the given x; see :func:`sphere_bundle_candidates`."""
    found = sphere_bundle_candidates(n, eta, r, x, A, cfg)
    if not found:
        raise NoRoot(f"no admissible y for x = {x!r} (n={n}, eta={eta}, r={r}, A={A})")
    return found[0]


# CP^n regime
def cpn_C(x, y, n: int, A: int):
    """C(x, y) for a critical point x of F and a boundary zero y."""
    return 2 * A * (n * x**2 - y + x**2 * y - n * y**2) / (
        n * (1 - x**2) * (x**2 - y**2) * (1 - y**2)
    )


def cpn_constants(n: int, A: int, x: float, y: float) -> tuple[float, float]:
    """C, D from F'(x) = 0 and the slope condition at y."""
    a, b = 1.0 - x * x, 1.0 - y * y
    det = b * b * a - a * a * b
    if abs(det) <= 1e-300:
        raise SingularSystem("CP^n system singular (y = +-x)")
    rb = -2 * A * y / n - 2 * A
    ra = -2 * A
    C = (rb * a - ra * b) / det
    D = (b * b * ra - a * a * rb) / det
    return C, D


def cpn_713_residual(spec: SolutionSpec) -> float:
    """2A + C (1 - y^2)^2 + D (1 - y^2) + 2Ay/n at the free end y."""
    n, A = spec.params.n, spec.params.A
    y = spec.x if A == -1 else spec.y
    b = 1.0 - y * y
    return 2 * A + spec.C * b * b + spec.D * b + 2 * A * y / n


def cpn_solve(
    n: int, A: int, cfg: BoundarySearchConfig | None = None, x: float | None = None
) -> SolutionSpec:
    """CP^n solution in the family labelled by the interior critical point x of F.

    z0(1) = 0 fixes E; z0'(1) = 2A/n then holds automatically. The free zero
    y is searched in (0, x) for A = -1 and in (x, bracketMax) for A = +1.
    """
    cfg = cfg or BoundarySearchConfig()
    if A not in (-1, 1):
        raise CaseMismatch("CP^n needs A = +-1")
    params = CaseParams(n=n, epsilon=1, A=A, s=Fraction(2, n), case=CaseTag.PROJECTIVE_SPACE)
    if x is None:
        x = 0.5 if A == -1 else 2.0
    if A == -1 and not 0.0 < x < 1.0:
        raise DomainError("A = -1 needs the critical point in (0, 1)")
    if A == 1 and not 1.0 < x < cfg.bracketMax:
        raise DomainError("A = +1 needs the critical point in (1, bracketMax)")

    def G(yv):
        C, D = cpn_constants(n, A, x, yv)
        return float(_Ftilde(yv, n, A, C, D) - _Ftilde(1.0, n, A, C, D))

    if A == -1:
        ys = x * np.linspace(0.0, 1.0, 4001)[1:-1]
    else:
        ys = x + (cfg.bracketMax - x) * np.linspace(0.0, 1.0, 4001)[1:-1] ** 2
    ys = ys[np.abs(ys - x) > 1e-6 * max(1.0, x)]
    vals = np.array([G(v) for v in ys])
    for i in range(len(ys) - 1):
        if not np.sign(vals[i]) != np.sign(vals[i + 1]):
            continue
        yv = brentq(G, ys[i], ys[i + 1], xtol=cfg.tolAbs, rtol=1e-15, maxiter=cfg.maxIter)
        C, D = cpn_constants(n, A, x, yv)
        E = -float(_Ftilde(1.0, n, A, C, D))
        lo, hi = (yv, 1.0) if A == -1 else (1.0, yv)
        try:
            spec = SolutionSpec(params, C, D, E, lo, hi, family=x)
            return _validated(spec)
        except (ResidualFailure, PositivityViolation, CaseMismatch):
            continue
    raise NoRoot(f"no admissible CP^{n} solution for critical point x = {x!r}")


# product regime
def product_constants(n: int, epsilon: int, x: float, y: float) -> tuple[float, float, float]:
    """C, D, E from z(x) = 0, z'(x) = 2, z(y) = 0 by an exact 3x3 solve."""
    a, b, c0 = 2 * n + 1, 2 * n - 1, 2 * n - 3

    def row_z(t):
        return [-(t**4) / a, -(t**2) / b, t ** (-c0)], -2 * epsilon / c0

    def row_zp(t):
        return [-4 * t**3 / a, -2 * t / b, -c0 * t ** (-c0 - 1)], 0.0

    rows = [row_z(x), row_zp(x), row_z(y)]
    M = np.array([r[0] for r in rows])
    rhs = np.array([r[1] for r in rows]) + np.array([0.0, 2.0, 0.0])
    if abs(np.linalg.det(M)) == 0.0:
        raise SingularSystem("product system singular")
    C, D, E = np.linalg.solve(M, rhs)
    return float(C), float(D), float(E)


def fcap_root(n: int, cfg: BoundarySearchConfig | None = None) -> RootCertificate:
    """Certified smallest root c0 > 1 of F (the Ricci-flat base compatibility)."""
    return smallest_root_above_one(fcap_poly(n), cfg or BoundarySearchConfig())


def product_solve(
    n: int, epsilon: int, c=None, x: float | None = None, cfg: BoundarySearchConfig | None = None
) -> SolutionSpec:
    """Product-regime solution on (x, c x).

    For epsilon != 0 the abscissa is x = x(c), which must be positive. For
    epsilon = 0 the ratio must be a root of F and x is a free scale
    (default 1); with ``c=None`` the smallest root of F is used.
    """
    cfg = cfg or BoundarySearchConfig()
    params = CaseParams(n=n, epsilon=epsilon, A=1, s=Fraction(0), case=CaseTag.PRODUCT)
    if epsilon != 0:
        if c is None:
            c = Fraction(2)
        cf = float(c) if isinstance(c, float) else float(parse_rational(c))
        if not cf > 1:
            raise DomainError("c must exceed 1")
        x = x_of_c(n, epsilon, c)
        if not x > 0:
            raise InadmissibleC(f"x(c) = {x:.6g} <= 0 for n={n}, eps={epsilon}, c={cf}")
    else:
        if c is None:
            cert = fcap_root(n, cfg)
            cf = cert.value
        else:
            cf = float(c) if isinstance(c, float) else float(parse_rational(c))
            if not cf > 1:
                raise DomainError("c must exceed 1")
            poly = fcap_poly(n)
            scale = sum(abs(float(a)) * cf**i for i, a in enumerate(poly.coefficients))
            if abs(poly.eval_float(cf)) > 1e-12 * scale:
                raise InadmissibleC(f"c = {cf} is not a root of F for n={n}")
        x = 1.0 if x is None else float(x)
        if not x > 0:
            raise DomainError("x must be positive")
    y = cf * x
    C, D, E = product_constants(n, epsilon, x, y)
    spec = SolutionSpec(params, C, D, E, x, y, family=cf)
    res = boundary_residuals(spec)
    if abs(res["slope(y)"]) > 1e-9:
        raise ResidualFailure(f"z'(y) + 2 = {res['slope(y)']:.3g}; the fourth condition fails")
    return _validated(spec)
