"""Explicit coordinates (t, psi, u, v) for the metric in real dimension four.

The base is a surface with metric h = k (du^2 + b(u)^2 dv^2) of Gauss
curvature 2 eps, and theta = d psi + a(u) dv with d theta = s k b du ^ dv:

    eps = +1:  k = 1/2, b = sin u,  a = -(s/2) cos u
    eps = -1:  k = 1/2, b = sinh u, a =  (s/2) cosh u
    eps =  0:  k = 1,   b = 1,      a =  s u

Curvature is computed from Christoffel symbols; the symbols use analytic
metric partials and their derivatives use centered differences with one
Richardson level. Nothing depends on psi or v, so only the t and u
derivatives are taken numerically; the other two vanish identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import CaseMismatch, ChartBoundary
from ..profiles.reconstruct import Profile, ProfileGrid
from ..profiles.types import CaseParams

CHART_DELTA = 1e-3
FD_STEP = 1e-3


@dataclass(frozen=True)
class ChartPoint:
    """A point of the chart: arc length t, fibre angle psi, base (u, v)."""

    t: float
    psi: float
    u: float
    v: float

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.psi, self.u, self.v], dtype=float)


class AnalyticProfile:
    """Profile given by explicit callables, for synthetic controls."""

    def __init__(self, params: CaseParams, L: float, f, fp, fpp, g, gp, gpp):
        self.params = params
        self.L = float(L)
        self._fns = {"f": f, "fPrime": fp, "fSecond": fpp, "g": g, "gPrime": gp, "gSecond": gpp}

    def evaluate(self, t, polish: bool = False) -> dict[str, np.ndarray]:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = {k: np.broadcast_to(np.asarray(fn(t), dtype=float), t.shape).copy() for k, fn in self._fns.items()}
        out["t"] = t
        return out


class BaseChart:
    """Local model of the two-dimensional Kaehler-Einstein base."""

    def __init__(self, epsilon: int, s: float):
        self.epsilon = epsilon
        self.s = s
        if epsilon == 1:
            self.k = 0.5
            self.b = np.sin
            self.db = np.cos
            self.a = lambda u: -(s / 2) * np.cos(u)
            self.da = lambda u: (s / 2) * np.sin(u)
        elif epsilon == -1:
            self.k = 0.5
            self.b = np.sinh
            self.db = np.cosh
            self.a = lambda u: (s / 2) * np.cosh(u)
            self.da = lambda u: (s / 2) * np.sinh(u)
        elif epsilon == 0:
            self.k = 1.0
            self.b = lambda u: np.ones_like(np.asarray(u, dtype=float))
            self.db = lambda u: np.zeros_like(np.asarray(u, dtype=float))
            self.a = lambda u: s * np.asarray(u, dtype=float)
            self.da = lambda u: s * np.ones_like(np.asarray(u, dtype=float))
        else:
            raise CaseMismatch("epsilon must be -1, 0 or 1")

    def kaehler_form(self, u):
        """Coefficient of du ^ dv in the base Kaehler form, k b(u)."""
        return self.k * self.b(u)

    def u_ok(self, u, delta: float = CHART_DELTA) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.epsilon == 1:
            return (u > delta) & (u < np.pi - delta)
        if self.epsilon == -1:
            return u > delta
        return np.isfinite(u)

    def metric(self, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        m = np.zeros(u.shape + (2, 2))
        m[..., 0, 0] = self.k
        m[..., 1, 1] = self.k * self.b(u) ** 2
        return m


def coordinate_curvature(
    metric_fn: Callable[[np.ndarray], np.ndarray],
    christoffel_fn: Callable[[np.ndarray], np.ndarray],
    X: np.ndarray,
    fd_dirs: tuple[int, ...],
    step: float = FD_STEP,
):
    """Riemann, Ricci and scalar curvature at the points ``X`` (shape (N, d)).

    ``christoffel_fn`` returns Gamma^k_ij with shape (N, d, d, d); its partial
    derivatives are taken by centered differences along ``fd_dirs`` only,
    with steps ``step`` and ``step/2`` combined by Richardson extrapolation.
    Conventions: R^r_{s m v} = d_m G^r_{v s} - d_v G^r_{m s}
    + G^r_{m l} G^l_{v s} - G^r_{v l} G^l_{m s} and Ric_{s v} = R^r_{s r v}.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N, d = X.shape
    shifts = []
    for m in fd_dirs:
        for h in (step, -step, step / 2, -step / 2):
            Y = X.copy()
            Y[:, m] += h
            shifts.append(Y)
    stacked = np.concatenate([X] + shifts, axis=0)
    gam_all = christoffel_fn(stacked)
    gam = gam_all[:N]
    dgam = np.zeros((N, d, d, d, d))
    for j, m in enumerate(fd_dirs):
        block = gam_all[N * (1 + 4 * j) : N * (5 + 4 * j)].reshape(4, N, d, d, d)
        d_big = (block[0] - block[1]) / (2 * step)
        d_small = (block[2] - block[3]) / step
        dgam[:, m] = (4 * d_small - d_big) / 3
    riem = (
        np.einsum("nmrvs->nrsmv", dgam)
        - np.einsum("nvrms->nrsmv", dgam)
        + np.einsum("nrml,nlvs->nrsmv", gam, gam)
        - np.einsum("nrvl,nlms->nrsmv", gam, gam)
    )
    ric = np.einsum("nrsrv->nsv", riem)
    ginv = np.linalg.inv(metric_fn(X))
    scal = np.einsum("nsv,nsv->n", ginv, ric)
    return riem, ric, scal, gam


def christoffel_from_partials(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Gamma^k_ij = 1/2 g^kl (d_i g_lj + d_j g_li - d_l g_ij); dg[n, m, i, j] = d_m g_ij."""
    T = np.einsum("nilj->nlij", dg) + np.einsum("njli->nlij", dg) - dg
    return 0.5 * np.einsum("nkl,nlij->nkij", ginv, T)


def base_christoffel(base: BaseChart, X: np.ndarray) -> np.ndarray:
    u = X[:, 0]
    g = base.metric(u)
    dg = np.zeros((len(u), 2, 2, 2))
    dg[:, 0, 1, 1] = 2 * base.k * base.b(u) * base.db(u)
    return christoffel_from_partials(np.linalg.inv(g), dg)


def base_scalar_curvature(epsilon: int, u) -> np.ndarray:
    """Scalar curvature of the base chart metric at the points u (numeric)."""
    base = BaseChart(epsilon, 0.0)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    X = np.stack([u, np.zeros_like(u)], axis=1)
    _, _, scal, _ = coordinate_curvature(
        lambda Y: base.metric(Y[:, 0]), lambda Y: base_christoffel(base, Y), X, (0,)
    )
    return scal


def as_profile(obj):
    """Accept a Profile, an AnalyticProfile, or a ProfileGrid carrying a spec."""
    if isinstance(obj, ProfileGrid):
        if obj.spec is None:
            raise CaseMismatch("a synthetic ProfileGrid has no continuous profile; use AnalyticProfile")
        return _profile_for_spec(obj.spec)
    return obj


_PROFILE_CACHE: dict = {}


def _profile_for_spec(spec):
    prof = _PROFILE_CACHE.get(spec)
    if prof is None:
        if len(_PROFILE_CACHE) > 32:
            _PROFILE_CACHE.clear()
        prof = _PROFILE_CACHE[spec] = Profile(spec)
    return prof


class ChartModel:
    """Metric, connection and curvature of the four-dimensional model."""

    def __init__(self, profile, delta: float = CHART_DELTA, fd_step: float = FD_STEP):
        self.profile = as_profile(profile)
        self.params: CaseParams = self.profile.params
        if self.params.n != 2:
            raise CaseMismatch("the coordinate model exists only for n = 2")
        self.L = float(self.profile.L)
        self.base = BaseChart(self.params.epsilon, float(self.params.s))
        self.delta = delta
        self.fd_step = fd_step

    # chart bookkeeping
    def inside(self, X: np.ndarray, t_margin: float | None = None, u_margin: float | None = None) -> np.ndarray:
        X = np.atleast_2d(X)
        tm = self.fd_step * 2 if t_margin is None else t_margin
        um = self.delta if u_margin is None else u_margin
        t, u = X[:, 0], X[:, 2]
        return (t > tm) & (t < self.L - tm) & self.base.u_ok(u, um)

    def require(self, X: np.ndarray):
        if not np.all(self.inside(X, u_margin=self.delta + 2 * self.fd_step)):
            raise ChartBoundary("point outside the regular range of the chart")

    def _profile(self, t):
        return self.profile.evaluate(t)

    # metric and connection
    def metric(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        pv = self._profile(X[:, 0])
        return self._metric_from(pv, X[:, 2])

    def _metric_from(self, pv, u):
        f, G = pv["f"], pv["g"]
        k, b, a = self.base.k, self.base.b(u), self.base.a(u)
        m = np.zeros((len(u), 4, 4))
        m[:, 0, 0] = 1.0
        m[:, 1, 1] = f * f
        m[:, 1, 3] = m[:, 3, 1] = f * f * a
        m[:, 3, 3] = f * f * a * a + G * G * k * b * b
        m[:, 2, 2] = G * G * k
        return m

    def metric_partials(self, X: np.ndarray) -> np.ndarray:
        """dg[n, m, i, j] = d_m g_ij (analytic)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        pv = self._profile(X[:, 0])
        return self._partials_from(pv, X[:, 2])

    def _partials_from(self, pv, u):
        f, fp, G, Gp = pv["f"], pv["fPrime"], pv["g"], pv["gPrime"]
        k, b, db = self.base.k, self.base.b(u), self.base.db(u)
        a, da = self.base.a(u), self.base.da(u)
        dg = np.zeros((len(u), 4, 4, 4))
        dg[:, 0, 1, 1] = 2 * f * fp
        dg[:, 0, 1, 3] = dg[:, 0, 3, 1] = 2 * f * fp * a
        dg[:, 0, 3, 3] = 2 * f * fp * a * a + 2 * G * Gp * k * b * b
        dg[:, 0, 2, 2] = 2 * G * Gp * k
        dg[:, 2, 1, 3] = dg[:, 2, 3, 1] = f * f * da
        dg[:, 2, 3, 3] = 2 * f * f * a * da + 2 * G * G * k * b * db
        return dg

    def christoffel(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        pv = self._profile(X[:, 0])
        u = X[:, 2]
        g = self._metric_from(pv, u)
        dg = self._partials_from(pv, u)
        return christoffel_from_partials(np.linalg.inv(g), dg)

    def curvature(self, X: np.ndarray):
        """(Riemann R^r_{smv}, Ricci, scalar, Christoffel) at points X."""
        return coordinate_curvature(self.metric, self.christoffel, X, (0, 2), self.fd_step)

    # orthonormal frame and almost complex structures
    def frame(self, X: np.ndarray) -> np.ndarray:
        """E[n, :, a] = coordinate components of e_a.

        e0 = d/dt, e1 = xi/f, e2 = d_u/(g sqrt k), e3 = (d_v - a d_psi)/(g sqrt(k) b).
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        pv = self._profile(X[:, 0])
        u = X[:, 2]
        f, G = pv["f"], pv["g"]
        sk = np.sqrt(self.base.k)
        b, a = self.base.b(u), self.base.a(u)
        E = np.zeros((len(u), 4, 4))
        E[:, 0, 0] = 1.0
        E[:, 1, 1] = 1.0 / f
        E[:, 2, 2] = 1.0 / (G * sk)
        E[:, 1, 3] = -a / (G * sk * b)
        E[:, 3, 3] = 1.0 / (G * sk * b)
        return E

    def complex_structure(self, X: np.ndarray, eps_sign: int) -> np.ndarray:
        """J^r_s in coordinates for J e0 = eps e1, J e1 = -eps e0, J e2 = e3."""
        if eps_sign not in (-1, 1):
            raise CaseMismatch("eps_sign must be -1 or +1")
        E = self.frame(X)
        Jf = np.zeros((4, 4))
        Jf[1, 0], Jf[0, 1] = eps_sign, -eps_sign
        Jf[3, 2], Jf[2, 3] = 1.0, -1.0
        return np.einsum("nra,ab,nbs->nrs", E, Jf, np.linalg.inv(E))

    def killing_form(self, X: np.ndarray):
        """Phi_{mv} = Ric - (tau/3) g with the metric and scalar curvature."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        _, ric, scal, gam = self.curvature(X)
        g = self.metric(X)
        return ric - scal[:, None, None] / 3.0 * g, ric, scal, g, gam
