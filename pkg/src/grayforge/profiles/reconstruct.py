"""Arc-length reconstruction of the profile functions from a solved z.

With u the independent variable of z (the rescaled h, or g), the arc length
is t(u) = k * integral_x^u du / sqrt(z) with k = r for the |A| = 1 regimes and
k = 1 otherwise. Both endpoint zeros of z are simple, so the substitutions
u = x + v^2 on the left half and u = y - w^2 on the right half turn the
integrand into a smooth, bounded function of v (resp. w). The inverse maps
v(t) and w(L - t) are smooth as well and are stored as Chebyshev series.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Chebyshev
from numpy.polynomial.legendre import leggauss

from ..errors import CaseMismatch, NonFiniteLength, PositivityViolation
from .closed_forms import slope_targets
from .types import CaseParams, CaseTag, SolutionSpec
from .zmodel import zmodel_for

_GL_X, _GL_W = leggauss(20)
_PANELS = 32
_TAYLOR_FRACTION = 1e-5
_SCAN_POINTS = 1000


def boundary_residuals(spec: SolutionSpec, model=None) -> dict[str, float]:
    """Signed residuals of z(x) = z(y) = 0 and of the two slope conditions.

    Evaluated through the factored model so that the collapsing end u = 1 of
    CP^n, a removable pole of the literal closed form, is handled exactly.
    """
    model = model if model is not None else zmodel_for(spec)
    d = model.derivs(np.array([spec.x, spec.y]))
    sx, sy = slope_targets(spec)
    return {
        "z(x)": float(d[0, 0]),
        "z(y)": float(d[0, 1]),
        "slope(x)": float(d[1, 0] - sx),
        "slope(y)": float(d[1, 1] - sy),
    }


def validate_spec(spec: SolutionSpec, tol: float = 1e-8, model=None) -> dict[str, float]:
    """Raise CaseMismatch unless the boundary residuals are below ``tol``.

    Value residuals are measured against the largest |z| on a scan of (x, y)
    and slope residuals against the target slopes.
    """
    model = model if model is not None else zmodel_for(spec)
    res = boundary_residuals(spec, model)
    scan = np.linspace(spec.x, spec.y, 257)
    zscale = max(float(np.max(np.abs(model(scan)))), 1e-300)
    sx, sy = slope_targets(spec)
    scaled = {
        "z(x)": abs(res["z(x)"]) / zscale,
        "z(y)": abs(res["z(y)"]) / zscale,
        "slope(x)": abs(res["slope(x)"]) / abs(sx),
        "slope(y)": abs(res["slope(y)"]) / abs(sy),
    }
    bad = {k: v for k, v in scaled.items() if not v <= tol}
    if bad:
        detail = ", ".join(f"{k}={v:.3g}" for k, v in bad.items())
        raise CaseMismatch(f"boundary conditions fail for this spec: {detail}")
    return res


def profile_values(params: CaseParams, u: np.ndarray, zd: np.ndarray) -> dict[str, np.ndarray]:
    """Map (u, z, z', z'') to f, g, h and their first two t-derivatives."""
    z = np.maximum(zd[0], 0.0)
    z1, z2 = zd[1], zd[2]
    rz = np.sqrt(z)
    case = params.case
    if case.uses_h_substitution:
        r = float(params.r)
        A = params.A
        q = -A * (1.0 - u) * (1.0 + u)
        sq = np.sqrt(q)
        f = rz
        fp = z1 / (2 * r)
        fpp = z2 * rz / (2 * r * r)
        g = r * sq
        with np.errstate(divide="ignore", invalid="ignore"):
            gp = A * u * rz / sq
            gpp = -z / (r * q * sq) + A * u * z1 / (2 * r * sq)
        axis = q == 0.0
        if np.any(axis):
            # At u = +-1 (the CP^n fixed point) z/q -> u A z'/2, and g is odd
            # in the distance to that point, so g'' -> 0.
            ua, za = u[axis], z1[axis]
            gp[axis] = A * ua * np.sqrt(np.maximum(ua * A * za / 2.0, 0.0))
            gpp[axis] = 0.0
        h = r * u
    elif case is CaseTag.KAEHLER:
        s = float(params.s)
        g = u.copy()
        gp = rz
        gpp = 0.5 * z1
        f = 2 * u * rz / s
        fp = (2.0 / s) * (z + 0.5 * u * z1)
        fpp = (3 * z1 + u * z2) * rz / s
        h = np.full_like(u, float(params.r))
    else:
        g = u.copy()
        gp = rz
        gpp = 0.5 * z1
        f = rz
        fp = 0.5 * z1
        fpp = 0.5 * z2 * rz
        h = u.copy()
    return {
        "u": u,
        "z": zd[0],
        "zPrime": z1,
        "zSecond": z2,
        "f": f,
        "fPrime": fp,
        "fSecond": fpp,
        "g": g,
        "gPrime": gp,
        "gSecond": gpp,
        "h": h,
    }


class _FastChebyshev:
    """Chebyshev series evaluated as cos(k arccos x) @ coef.

    Clenshaw recurrence loops over the degree in Python, which dominates the
    cost of the small batches used by geodesic integration.
    """

    def __init__(self, cheb: Chebyshev):
        coef = np.asarray(cheb.coef, dtype=float)
        keep = np.flatnonzero(np.abs(coef) > 1e-18 * np.max(np.abs(coef)))
        self.coef = coef[: keep[-1] + 1] if keep.size else coef[:1]
        self.k = np.arange(len(self.coef), dtype=float)
        self.lo, self.hi = (float(d) for d in cheb.domain)
        self.series = cheb

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        s = np.clip((2 * x - (self.lo + self.hi)) / (self.hi - self.lo), -1.0, 1.0)
        return np.cos(np.multiply.outer(np.arccos(s), self.k)) @ self.coef


class Profile:
    """Continuous profile t -> (f, g, h, z, ...) on [0, L] for one solution.

    ``model`` overrides the z of ``spec`` (used for perturbed negative
    controls); it must keep the same simple zeros at x and y.
    """

    def __init__(self, spec: SolutionSpec, model=None, validate: bool = True):
        self.spec = spec
        self.params = spec.params
        self.model = model if model is not None else zmodel_for(spec)
        self.k = float(spec.params.r) if spec.params.case.uses_h_substitution else 1.0
        x, y = spec.x, spec.y
        self.x, self.y = x, y
        if validate:
            validate_spec(spec, model=self.model)
        dx = self.model.derivs(np.array([x, y]))
        self._jet_x = dx[1:, 0]
        self._jet_y = dx[1:, 1]
        self._check_ends()
        self._check_positivity()
        self.u_mid = 0.5 * (x + y)
        self.V = np.sqrt(self.u_mid - x)
        self.W = np.sqrt(y - self.u_mid)
        self._left = self._panel_table(self._phi_left, self.V)
        self._right = self._panel_table(self._phi_right, self.W)
        self.t_mid = float(self._cumulative(self._left, np.array([self.V]))[0])
        self.L = self.t_mid + float(self._cumulative(self._right, np.array([self.W]))[0])
        if not np.isfinite(self.L) or self.L <= 0:
            raise NonFiniteLength("arc length is not a positive finite number")
        self._cheb_left = self._fit_inverse(self._left, self._phi_left, self.t_mid, self.V)
        self._cheb_right = self._fit_inverse(
            self._right, self._phi_right, self.L - self.t_mid, self.W
        )

    # endpoint and positivity checks
    def _check_ends(self):
        span = self.y - self.x
        zscale = float(np.max(np.abs(self.model(np.linspace(self.x, self.y, 65)))))
        floor = 1e-10 * max(zscale, 1e-300) / span
        for name, slope, sign in (("x", self._jet_x[0], 1.0), ("y", self._jet_y[0], -1.0)):
            if abs(slope) <= floor:
                raise NonFiniteLength(f"z has a multiple zero at {name}; the arc length diverges")
            if sign * slope < 0:
                raise PositivityViolation(f"z turns negative just inside {name}")

    def _check_positivity(self):
        u = np.linspace(self.x, self.y, _SCAN_POINTS + 2)[1:-1]
        z = self.model(u)
        if not np.all(z > 0):
            bad = u[np.argmin(z)]
            raise PositivityViolation(f"z <= 0 inside (x, y), near u = {bad:.6g}")

    # regularized integrands
    def _ratio(self, delta, jet, base, sign):
        """z(base + sign*delta)/delta, by Taylor expansion for tiny delta."""
        tiny = delta < _TAYLOR_FRACTION * (self.y - self.x)
        out = np.empty_like(delta)
        if np.any(~tiny):
            d = delta[~tiny]
            out[~tiny] = self.model(base + sign * d) / d
        if np.any(tiny):
            d = delta[tiny]
            z1, z2, z3 = jet
            out[tiny] = sign * z1 + z2 * d / 2 + sign * z3 * d * d / 6
        return out

    def _phi_left(self, v):
        ratio = self._ratio(v * v, self._jet_x, self.x, 1.0)
        if np.any(ratio <= 0):
            raise PositivityViolation("z <= 0 at a quadrature node")
        return 2.0 * self.k / np.sqrt(ratio)

    def _phi_right(self, w):
        ratio = self._ratio(w * w, self._jet_y, self.y, -1.0)
        if np.any(ratio <= 0):
            raise PositivityViolation("z <= 0 at a quadrature node")
        return 2.0 * self.k / np.sqrt(ratio)

    # composite Gauss-Legendre cumulative integrals
    def _panel_table(self, phi, upper):
        edges = np.linspace(0.0, upper, _PANELS + 1)
        a, b = edges[:-1], edges[1:]
        nodes = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * _GL_X[None, :]
        vals = phi(nodes.ravel()).reshape(nodes.shape)
        pieces = 0.5 * (b - a) * (vals @ _GL_W)
        cum = np.concatenate([[0.0], np.cumsum(pieces)])
        return {"phi": phi, "edges": edges, "cum": cum, "upper": upper}

    @staticmethod
    def _cumulative(table, v):
        edges, cum = table["edges"], table["cum"]
        width = edges[1] - edges[0]
        v = np.asarray(v, dtype=float)
        idx = np.clip((v / width).astype(int), 0, len(edges) - 2)
        a = edges[idx]
        half = 0.5 * (v - a)
        nodes = a[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
        vals = table["phi"](nodes.ravel()).reshape(nodes.shape)
        return cum[idx] + half * (vals @ _GL_W)

    def _newton_inverse(self, table, phi, target, upper):
        vtab = np.linspace(0.0, upper, 257)
        ttab = self._cumulative(table, vtab)
        v = np.interp(target, ttab, vtab)
        for _ in range(8):
            step = (self._cumulative(table, v) - target) / phi(v)
            v = np.clip(v - step, 0.0, upper)
            if np.max(np.abs(step), initial=0.0) <= 4e-16 * upper:
                break
        return v

    def _fit_inverse(self, table, phi, tmax, upper):
        def inverse(tt):
            return self._newton_inverse(table, phi, np.asarray(tt, dtype=float), upper)

        for deg in (32, 64, 128, 256):
            cheb = Chebyshev.interpolate(inverse, deg, domain=[0.0, tmax])
            tail = np.max(np.abs(cheb.coef[-4:]))
            if tail <= 1e-15 * upper:
                break
        return _FastChebyshev(cheb)

    # public evaluation
    def t_of_u(self, u):
        """Arc length from the left end to parameter value ``u``."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty_like(u)
        left = u <= self.u_mid
        out[left] = self._cumulative(self._left, np.sqrt(np.maximum(u[left] - self.x, 0.0)))
        out[~left] = self.L - self._cumulative(
            self._right, np.sqrt(np.maximum(self.y - u[~left], 0.0))
        )
        return out

    def u_of_t(self, t, polish: bool = False):
        """Parameter value u at arc length ``t`` (clipped to [0, L])."""
        t = np.clip(np.atleast_1d(np.asarray(t, dtype=float)), 0.0, self.L)
        out = np.empty_like(t)
        left = t <= self.t_mid
        if np.any(left):
            tl = t[left]
            v = self._cheb_left(tl)
            if polish:
                v = self._newton_inverse(self._left, self._phi_left, tl, self.V)
            out[left] = self.x + np.clip(v, 0.0, self.V) ** 2
        if np.any(~left):
            tr = self.L - t[~left]
            w = self._cheb_right(tr)
            if polish:
                w = self._newton_inverse(self._right, self._phi_right, tr, self.W)
            out[~left] = self.y - np.clip(w, 0.0, self.W) ** 2
        return out

    def evaluate_u(self, u) -> dict[str, np.ndarray]:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return profile_values(self.params, u, self.model.derivs(u))

    def evaluate(self, t, polish: bool = False) -> dict[str, np.ndarray]:
        """All profile quantities at arc length ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        vals = self.evaluate_u(self.u_of_t(t, polish=polish))
        vals["t"] = t
        return vals

    def grid(self, grid_size: int = 2048) -> "ProfileGrid":
        if grid_size < 4:
            raise ValueError("grid_size must be at least 4")
        t = np.linspace(0.0, self.L, grid_size)
        vals = self.evaluate(t, polish=True)
        # Pin the endpoints exactly to the boundary abscissae.
        vals = self.evaluate_u(np.concatenate([[self.x], vals["u"][1:-1], [self.y]]))
        return ProfileGrid(params=self.params, L=self.L, t=t, spec=self.spec, **vals)


@dataclass(frozen=True)
class ProfileGrid:
    """Sampled profile over [0, L] with analytic first and second derivatives."""

    params: CaseParams
    L: float
    t: np.ndarray
    f: np.ndarray
    g: np.ndarray
    h: np.ndarray
    z: np.ndarray
    fPrime: np.ndarray
    gPrime: np.ndarray
    fSecond: np.ndarray
    gSecond: np.ndarray
    u: np.ndarray | None = None
    zPrime: np.ndarray | None = None
    zSecond: np.ndarray | None = None
    spec: SolutionSpec | None = field(default=None, compare=False)

    def __post_init__(self):
        size = len(self.t)
        for name in ("f", "g", "h", "z", "fPrime", "gPrime", "fSecond", "gSecond"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (size,):
                raise ValueError(f"array {name} has shape {arr.shape}, expected ({size},)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        t = np.asarray(self.t, dtype=float)
        if not np.all(np.diff(t) > 0):
            raise ValueError("t must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "t", t)

    def __len__(self):
        return len(self.t)

    @property
    def n(self) -> int:
        return self.params.n

    @classmethod
    def from_arrays(cls, params: CaseParams, t, f, fp, fpp, g, gp, gpp, h=None, z=None):
        """Build a grid from explicit arrays, for synthetic controls."""
        t = np.asarray(t, dtype=float)
        f = np.asarray(f, dtype=float)
        return cls(
            params=params,
            L=float(t[-1] - t[0]),
            t=t,
            f=f,
            g=np.asarray(g, dtype=float),
            h=np.zeros_like(t) if h is None else np.asarray(h, dtype=float),
            z=f * f if z is None else np.asarray(z, dtype=float),
            fPrime=np.asarray(fp, dtype=float),
            gPrime=np.asarray(gp, dtype=float),
            fSecond=np.asarray(fpp, dtype=float),
            gSecond=np.asarray(gpp, dtype=float),
        )


def reconstruct_profile(spec: SolutionSpec, grid_size: int = 2048, model=None) -> ProfileGrid:
    """Sample the profile of ``spec`` on a uniform arc-length grid."""
    return Profile(spec, model=model).grid(grid_size)


def grid_identities(grid: ProfileGrid) -> dict[str, float]:
    """Max relative residuals of the pointwise identities a grid must satisfy.

    ``g2`` checks g^2 = |r^2 - h^2| (|A| = 1 only) relative to r^2, with the
    pointwise ratio in ``g2_pointwise``; ``z`` checks that z is the square of
    the derivative profile (f, g', or s f/(2 g) by regime).
    """
    p = grid.params
    out = {}
    inner = slice(1, -1)
    if p.case.uses_h_substitution:
        r = float(p.r)
        lhs = grid.g[inner] ** 2
        hh = grid.h[inner]
        rhs = np.abs((r - hh) * (r + hh))
        # Relative to r^2: near the CP^n fixed point r^2 - h^2 is tiny and the
        # stored h carries an absolute rounding error, so a pointwise ratio
        # measures only the conditioning of the subtraction.
        out["g2"] = float(np.max(np.abs(lhs - rhs)) / (r * r))
        out["g2_pointwise"] = float(np.max(np.abs(lhs - rhs) / np.maximum(rhs, 1e-300)))
        deriv = grid.f
    elif p.case is CaseTag.KAEHLER:
        deriv = float(p.s) * grid.f / (2 * grid.g)
    else:
        deriv = grid.f
    z = grid.z[inner]
    sq = deriv[inner] ** 2
    out["z"] = float(np.max(np.abs(z - sq) / np.maximum(np.abs(z), 1e-300)))
    return out
