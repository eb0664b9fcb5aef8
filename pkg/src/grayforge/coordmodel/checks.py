"""Direct numerical geometry on the four-dimensional chart model.

Every check here works from the coordinate metric alone (plus the profile
functions), so it is independent of the closed-form eigenvalue formulas in
:mod:`grayforge.curvature`.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ChartBoundary, ChartExit
from ..profiles.types import CaseParams, CaseTag
from .chart import AnalyticProfile, ChartModel, ChartPoint

DEFAULT_SEED = 0
TENSOR_FD_STEP = 1e-2
# Geodesics are frozen once they come this close to a coordinate axis
# (t = 0, t = L, or a polar axis of the base chart). The metric is smooth
# there, but coordinate Christoffel symbols blow up and the finite-difference
# curvature loses accuracy.
GEODESIC_T_MARGIN = 0.1
GEODESIC_U_MARGIN = 0.15


def _model(obj) -> ChartModel:
    return obj if isinstance(obj, ChartModel) else ChartModel(obj)


def _points(p) -> np.ndarray:
    if isinstance(p, ChartPoint):
        return p.as_array()[None, :]
    return np.atleast_2d(np.asarray(p, dtype=float))


def metric_at(p: ChartPoint, grid) -> np.ndarray:
    """The 4x4 metric matrix in coordinates (t, psi, u, v)."""
    M = _model(grid)
    X = _points(p)
    M.require(X)
    return M.metric(X)[0]


def metric_partials_at(p: ChartPoint, grid) -> np.ndarray:
    """Analytic partials ``dg[m, i, j] = d_m g_ij``."""
    M = _model(grid)
    X = _points(p)
    M.require(X)
    return M.metric_partials(X)[0]


@dataclass
class PointCurvature:
    """Coordinate curvature at one point, plus its orthonormal-frame views."""

    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    christoffel: np.ndarray
    frame: np.ndarray
    ricci_frame: np.ndarray

    def sectional(self, a: int, b: int) -> float:
        """Sectional curvature of the plane spanned by frame vectors e_a, e_b."""
        E = self.frame
        ea, eb = E[:, a], E[:, b]
        # R(X, Y, Y, X) = g(R(X, Y) Y, X) with R(X,Y)Z^r = R^r_{s m v} Z^s X^m Y^v
        lowered = np.einsum("rl,lsmv->rsmv", self._metric, self.riemann)
        return float(np.einsum("r,s,m,v,rsmv->", ea, eb, ea, eb, lowered))

    _metric: np.ndarray = field(default=None, repr=False)


def curvature_at(p: ChartPoint, grid) -> PointCurvature:
    """Riemann, Ricci and scalar curvature at ``p`` (finite-difference path)."""
    M = _model(grid)
    X = _points(p)
    M.require(X)
    riem, ric, scal, gam = M.curvature(X)
    E = M.frame(X)[0]
    return PointCurvature(
        riemann=riem[0],
        ricci=ric[0],
        scalar=float(scal[0]),
        christoffel=gam[0],
        frame=E,
        ricci_frame=E.T @ ric[0] @ E,
        _metric=M.metric(X)[0],
    )


def frame_sectionals(p: ChartPoint, grid) -> dict[str, float]:
    """Sectional curvatures of the frame planes (H, xi), (H, U), (JH, U), (X, JX)."""
    pc = curvature_at(p, grid)
    return {
        "H_xi": pc.sectional(0, 1),
        "H_X": pc.sectional(0, 2),
        "JH_U": pc.sectional(1, 2),
        "X_JX": pc.sectional(2, 3),
    }


# --------------------------------------------------------------------------
# random sampling helpers


def random_points(M: ChartModel, count: int, rng: np.random.Generator, t_range=(0.2, 0.8)) -> np.ndarray:
    """Random interior chart points, well away from the axes and chart edges."""
    t = rng.uniform(t_range[0] * M.L, t_range[1] * M.L, count)
    psi = rng.uniform(0, 2 * np.pi, count)
    eps = M.params.epsilon
    if eps == 1:
        u = rng.uniform(np.pi / 4, 3 * np.pi / 4, count)
    elif eps == -1:
        u = rng.uniform(0.5, 1.5, count)
    else:
        u = rng.uniform(-1.0, 1.0, count)
    v = rng.uniform(0, 2 * np.pi, count)
    return np.stack([t, psi, u, v], axis=1)


def random_unit_vectors(M: ChartModel, X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Coordinate components of random g-unit vectors at the points X."""
    w = rng.standard_normal((len(X), 4))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    return np.einsum("nia,na->ni", M.frame(X), w)


# --------------------------------------------------------------------------
# geodesics


@dataclass
class GeodesicCheckReport:
    """Conservation residuals along seeded random geodesics."""

    speedDrift: float
    killingDrift: float
    steps: int
    geodesicCount: int
    horizon: float
    seed: int
    truncated: int
    validSteps: list[int]
    perGeodesicSpeed: list[float]
    perGeodesicKilling: list[float]
    killingScale: float
    trace: list | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("trace")
        return out


def _phi_quadratic(M: ChartModel, X: np.ndarray, V: np.ndarray):
    """Return Phi(V, V) and the frame operator norm of Phi at each point."""
    phi, _, _, _, _ = M.killing_form(X)
    val = np.einsum("ni,nij,nj->n", V, phi, V)
    E = M.frame(X)
    pf = np.einsum("nia,nij,njb->nab", E, phi, E)
    norm = np.abs(np.linalg.eigvalsh(pf)).max(axis=1)
    return val, norm


def _acceleration(M: ChartModel, X, V):
    gam = M.christoffel(X)
    return -np.einsum("nkij,ni,nj->nk", gam, V, V)


def integrate_geodesics(M: ChartModel, X0, V0, steps: int, horizon: float, t_margin=None, u_margin=None, on_step=None):
    """Fixed-step RK4 for x'' = -Gamma(x', x'), freezing each curve at chart exit.

    Returns the final states, the number of valid steps of each curve, and
    calls ``on_step(k, X, V, alive)`` after every step when supplied.
    """
    X = np.array(X0, dtype=float)
    V = np.array(V0, dtype=float)
    h = horizon / steps
    tm = GEODESIC_T_MARGIN * M.L if t_margin is None else t_margin
    um = GEODESIC_U_MARGIN if u_margin is None else u_margin
    alive = M.inside(X, tm, um)
    valid = np.zeros(len(X), dtype=int)
    if on_step is not None:
        on_step(0, X, V, alive)
    for k in range(1, steps + 1):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        x, v = X[idx], V[idx]
        k1x, k1v = v, _acceleration(M, x, v)
        x2, v2 = x + 0.5 * h * k1x, v + 0.5 * h * k1v
        k2x, k2v = v2, _acceleration(M, x2, v2)
        x3, v3 = x + 0.5 * h * k2x, v + 0.5 * h * k2v
        k3x, k3v = v3, _acceleration(M, x3, v3)
        x4, v4 = x + h * k3x, v + h * k3v
        k4x, k4v = v4, _acceleration(M, x4, v4)
        xn = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        vn = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        ok = M.inside(xn, tm, um) & np.all(np.isfinite(xn), axis=1) & np.all(np.isfinite(vn), axis=1)
        X[idx[ok]], V[idx[ok]] = xn[ok], vn[ok]
        valid[idx[ok]] = k
        alive[idx[~ok]] = False
        if on_step is not None:
            on_step(k, X, V, alive)
    return X, V, valid


def _phi_chunked(M: ChartModel, X: np.ndarray, V: np.ndarray, chunk: int = 4096):
    vals = np.empty(len(X))
    norms = np.empty(len(X))
    for i in range(0, len(X), chunk):
        vals[i : i + chunk], norms[i : i + chunk] = _phi_quadratic(M, X[i : i + chunk], V[i : i + chunk])
    return vals, norms


def geodesic_check(
    grid,
    spec=None,
    count: int = 20,
    steps: int = 10_000,
    horizon: float = 1.0,
    seed: int = DEFAULT_SEED,
    strict: bool = False,
    trace: bool = False,
) -> GeodesicCheckReport:
    """Integrate seeded random unit-speed geodesics and track g(v,v) and Phi(v,v).

    The states of every step are stored, and Phi(v, v) is evaluated at all
    of them afterwards in vectorized chunks. A geodesic that leaves the
    chart is frozen and scored over its valid segment; with ``strict=True``
    such an exit raises :class:`ChartExit`. ``killingDrift`` is normalized
    by the largest frame eigenvalue magnitude of Phi met along the curves.
    """
    M = _model(grid)
    rng = np.random.default_rng(seed)
    X0 = random_points(M, count, rng)
    V0 = random_unit_vectors(M, X0, rng)
    states_x = np.empty((steps + 1, count, 4))
    states_v = np.empty((steps + 1, count, 4))

    def on_step(k, X, V, alive):
        states_x[k], states_v[k] = X, V

    _, _, valid = integrate_geodesics(M, X0, V0, steps, horizon, on_step=on_step)
    last = int(valid.max())
    states_x[last + 1 :] = states_x[last]
    states_v[last + 1 :] = states_v[last]
    mask = np.arange(steps + 1)[:, None] <= valid[None, :]
    xs, vs = states_x[mask], states_v[mask]
    owner = np.broadcast_to(np.arange(count), (steps + 1, count))[mask]
    stepno = np.broadcast_to(np.arange(steps + 1)[:, None], (steps + 1, count))[mask]
    speed = np.einsum("ni,nij,nj->n", vs, M.metric(xs), vs)
    phi, norm = _phi_chunked(M, xs, vs)
    speed_dev = np.zeros(count)
    phi_dev = np.zeros(count)
    for i in range(count):
        sel = owner == i
        sp, ph = speed[sel], phi[sel]
        speed_dev[i] = np.abs(sp - sp[0]).max() / sp[0]
        phi_dev[i] = np.abs(ph - ph[0]).max()
    scale = float(norm.max()) if norm.size and norm.max() > 0 else 1.0
    truncated = int(np.sum(valid < steps))
    if strict and truncated:
        raise ChartExit(f"{truncated} of {count} geodesics left the chart before the horizon")
    rows = None
    if trace:
        order = np.lexsort((owner, stepno))
        rows = [(int(stepno[j]), int(owner[j]), *map(float, xs[j]), float(speed[j]), float(phi[j])) for j in order]
    return GeodesicCheckReport(
        speedDrift=float(speed_dev.max()),
        killingDrift=float(phi_dev.max() / scale),
        steps=steps,
        geodesicCount=count,
        horizon=horizon,
        seed=seed,
        truncated=truncated,
        validSteps=[int(v) for v in valid],
        perGeodesicSpeed=[float(v) for v in speed_dev],
        perGeodesicKilling=[float(v / scale) for v in phi_dev],
        killingScale=scale,
        trace=rows,
    )


def t_line_check(grid, start_fraction: float = 0.2, end_fraction: float = 0.8, steps: int = 2000, u0: float | None = None) -> dict:
    """Follow the geodesic with initial velocity d/dt.

    Reports the drift of (psi, u, v), the relative variation of Phi(v, v)
    along it, and the largest gap between Phi(d/dt, d/dt) and lambda0 - tau/3
    from the closed-form eigenvalues.
    """
    from ..curvature import _eigs

    M = _model(grid)
    if u0 is None:
        u0 = np.pi / 2 if M.params.epsilon == 1 else 1.0
    t0, t1 = start_fraction * M.L, end_fraction * M.L
    X0 = np.array([[t0, 0.3, u0, 0.7]])
    V0 = np.array([[1.0, 0.0, 0.0, 0.0]])
    samples = []

    def on_step(k, X, V, alive):
        if k % 10 == 0:
            samples.append((X[0].copy(), V[0].copy()))

    _, _, valid = integrate_geodesics(M, X0, V0, steps, t1 - t0, t_margin=0.01 * M.L, on_step=on_step)
    Xs = np.array([s[0] for s in samples])
    Vs = np.array([s[1] for s in samples])
    transverse = float(np.abs(Xs[:, 1:] - X0[0, 1:]).max())
    phi, norm = _phi_quadratic(M, Xs, Vs)
    pv = M.profile.evaluate(Xs[:, 0])
    l0, l1, l2 = _eigs(M.params, pv["f"], pv["fPrime"], pv["fSecond"], pv["g"], pv["gPrime"], pv["gSecond"])
    tau = l0 + l1 + 2 * (M.params.n - 1) * l2
    scale = float(max(norm.max(), 1e-300))
    return {
        "transverseDrift": transverse,
        "phiVariation": float((phi.max() - phi.min()) / scale),
        "phiMean": float(phi.mean()),
        "phiVsEigenvalues": float(np.abs(phi - (l0 - tau / 3)).max() / scale),
        "bridgeDefect": float(np.abs((l0 - tau / 3) - (l0 - 2 * l2) / 3).max() / scale),
        "validSteps": int(valid[0]),
        "steps": steps,
    }


# --------------------------------------------------------------------------
# tensor identities at a point


def _shifted(X: np.ndarray, step: float):
    """Stack X with +/-step and +/-step/2 shifts in t and u (directions 0, 2)."""
    out = [X]
    for m in (0, 2):
        for h in (step, -step, step / 2, -step / 2):
            Y = X.copy()
            Y[:, m] += h
            out.append(Y)
    return np.concatenate(out, axis=0)


def _fd_derivative(values: np.ndarray, N: int, step: float) -> np.ndarray:
    """Richardson centered derivatives in t and u from a _shifted evaluation."""
    base = values[:N]
    d = np.zeros((N, 4) + base.shape[1:])
    for j, m in enumerate((0, 2)):
        blk = values[N * (1 + 4 * j) : N * (5 + 4 * j)].reshape((4, N) + base.shape[1:])
        big = (blk[0] - blk[1]) / (2 * step)
        small = (blk[2] - blk[3]) / step
        d[:, m] = (4 * small - big) / 3
    return d


def _local_scale(M: ChartModel, X: np.ndarray) -> float:
    return float(min(M.L, 1.0))


def nabla_phi(M: ChartModel, X: np.ndarray, step: float | None = None):
    """Covariant derivative (nabla_m Phi)_{ij} at X, plus Phi and Christoffels."""
    step = TENSOR_FD_STEP * _local_scale(M, X) if step is None else step
    N = len(X)
    phi_all, _, _, _, gam_all = M.killing_form(_shifted(X, step))
    dphi = _fd_derivative(phi_all, N, step)
    phi, gam = phi_all[:N], gam_all[:N]
    nab = dphi - np.einsum("nlmi,nlj->nmij", gam, phi) - np.einsum("nlmj,nil->nmij", gam, phi)
    return nab, phi, gam


def cyclic_condition_check(p, grid, triples: int = 20, seed: int = DEFAULT_SEED, step: float | None = None) -> float:
    """Max over random unit (X, Y, Z) of the cyclic sum of nabla Phi, over |Phi|."""
    M = _model(grid)
    X = _points(p)
    M.require(X)
    rng = np.random.default_rng(seed)
    nab, phi, _ = nabla_phi(M, X, step)
    E = M.frame(X)[0]
    pf = E.T @ phi[0] @ E
    phinorm = float(np.linalg.norm(pf))
    nf = np.einsum("mij,ma,ib,jc->abc", nab[0], E, E, E)
    worst = 0.0
    for _ in range(triples):
        a, b, c = rng.standard_normal((3, 4))
        a, b, c = a / np.linalg.norm(a), b / np.linalg.norm(b), c / np.linalg.norm(c)
        cyc = (
            np.einsum("m,i,j,mij->", a, b, c, nf)
            + np.einsum("m,i,j,mij->", c, a, b, nf)
            + np.einsum("m,i,j,mij->", b, c, a, nf)
        )
        worst = max(worst, abs(cyc))
    return worst / (phinorm if phinorm > 0 else 1.0)


def nabla_J(M: ChartModel, X: np.ndarray, eps_sign: int, step: float | None = None):
    """(nabla_m J)^r_s at X and J itself."""
    step = TENSOR_FD_STEP * _local_scale(M, X) if step is None else step
    N = len(X)
    S = _shifted(X, step)
    J_all = M.complex_structure(S, eps_sign)
    dJ = _fd_derivative(J_all, N, step)
    J = J_all[:N]
    gam = M.christoffel(X)
    nab = dJ + np.einsum("nrml,nls->nmrs", gam, J) - np.einsum("nlms,nrl->nmrs", gam, J)
    return nab, J


def hermitian_algebra(p, grid, eps_sign: int) -> dict[str, float]:
    """Residuals of J^2 = -1 and g(J., J.) = g at p."""
    M = _model(grid)
    X = _points(p)
    M.require(X)
    J = M.complex_structure(X, eps_sign)[0]
    g = M.metric(X)[0]
    return {
        "J2": float(np.abs(J @ J + np.eye(4)).max()),
        "orthogonal": float(np.abs(J.T @ g @ J - g).max() / np.abs(g).max()),
    }


def hermitian_check(p, grid, eps_sign: int, pairs: int = 20, seed: int = DEFAULT_SEED, step: float | None = None) -> float:
    """Max residual of nabla J(JX, JY) = nabla J(X, Y) over random unit X, Y.

    The residual is taken in the orthonormal frame and divided by the frame
    norm of nabla J, floored at 1 so that a Kaehler structure (nabla J = 0)
    does not turn finite-difference noise into an O(1) ratio.
    """
    M = _model(grid)
    X = _points(p)
    M.require(X)
    if eps_sign not in (-1, 1):
        raise ValueError("eps_sign must be -1 or +1")
    rng = np.random.default_rng(seed)
    nab, J = nabla_J(M, X, eps_sign, step)
    E = M.frame(X)[0]
    Einv = np.linalg.inv(E)
    nf = np.einsum("mrs,ma,br,sc->abc", nab[0], E, Einv, E)  # (nabla_{e_a} J) e_c, component b
    Jf = Einv @ J[0] @ E
    norm = float(np.linalg.norm(nf))
    worst = 0.0
    for _ in range(pairs):
        a, c = rng.standard_normal((2, 4))
        a, c = a / np.linalg.norm(a), c / np.linalg.norm(c)
        lhs = np.einsum("a,abc,c->b", Jf @ a, nf, Jf @ c)
        rhs = np.einsum("a,abc,c->b", a, nf, c)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst / max(norm, 1.0)


def nabla_J_norm(p, grid, eps_sign: int) -> float:
    """Frame norm of nabla J at p (zero for a Kaehler structure)."""
    M = _model(grid)
    X = _points(p)
    nab, _ = nabla_J(M, X, eps_sign)
    E = M.frame(X)[0]
    return float(np.linalg.norm(np.einsum("mrs,ma,br,sc->abc", nab[0], E, np.linalg.inv(E), E)))


def mean_curvature_check(p, grid) -> dict[str, float]:
    """Mean curvature of the horizontal distribution against -grad ln g.

    The frame fields e2 and e3 have coordinate components that do not vary
    along themselves, so nabla_{e_i} e_i reduces to Gamma(e_i, e_i).
    """
    M = _model(grid)
    X = _points(p)
    M.require(X)
    E = M.frame(X)[0]
    gam = M.christoffel(X)[0]
    mean = 0.5 * (np.einsum("kij,i,j->k", gam, E[:, 2], E[:, 2]) + np.einsum("kij,i,j->k", gam, E[:, 3], E[:, 3]))
    mf = np.linalg.solve(E, mean)
    pv = M.profile.evaluate(X[:, 0])
    target = -pv["gPrime"][0] / pv["g"][0]
    return {
        "H_component": float(mf[0]),
        "target": float(target),
        "residual": float(abs(mf[0] - target) / max(abs(target), 1.0)),
        "xi_component": float(mf[1]),
        "horizontal_component": float(np.hypot(mf[2], mf[3])),
    }


def kaehler_nabla_rho_check(p, grid, eps_sign: int, step: float | None = None) -> dict[str, float]:
    """Residual of the Kaehler identity for nabla rho in dimension four.

    Tests nabla_X rho(Y, Z) = k (g(X,Y) dtau(Z) + g(X,Z) dtau(Y)
    + 2 g(Y,Z) dtau(X) - g(JX,Y) dtau(JZ) - g(JX,Z) dtau(JY)) and reports the
    least-squares k together with the residual at k = 1/12.
    """
    M = _model(grid)
    X = _points(p)
    M.require(X)
    step = TENSOR_FD_STEP * _local_scale(M, X) if step is None else step
    N = len(X)
    S = _shifted(X, step)
    _, ric_all, scal_all, gam_all = M.curvature(S)
    dric = _fd_derivative(ric_all, N, step)
    dtau = _fd_derivative(scal_all, N, step)[0]
    ric, gam = ric_all[:N], gam_all[:N]
    nab = dric - np.einsum("nlmi,nlj->nmij", gam, ric) - np.einsum("nlmj,nil->nmij", gam, ric)
    E = M.frame(X)[0]
    Einv = np.linalg.inv(E)
    nf = np.einsum("mij,ma,ib,jc->abc", nab[0], E, E, E)
    Jf = Einv @ M.complex_structure(X, eps_sign)[0] @ E
    dt = E.T @ dtau  # frame components of dtau
    I = np.eye(4)
    JX = Jf  # JX[b, a] = component b of J e_a
    # g(J e_a, e_b) = Jf[b, a]; dtau(J e_c) = sum_b Jf[b, c] dt[b]
    dJ = Jf.T @ dt
    rhs = (
        np.einsum("ab,c->abc", I, dt)
        + np.einsum("ac,b->abc", I, dt)
        + 2 * np.einsum("bc,a->abc", I, dt)
        - np.einsum("ba,c->abc", JX, dJ)
        - np.einsum("ca,b->abc", JX, dJ)
    )
    denom = float(np.sum(rhs * rhs))
    k_fit = float(np.sum(nf * rhs) / denom) if denom > 0 else float("nan")
    scale = float(np.abs(nf).max()) or 1.0
    return {
        "coefficient": k_fit,
        "residual_at_1_12": float(np.abs(nf - rhs / 12).max() / scale),
        "nabla_rho_scale": scale,
    }


# --------------------------------------------------------------------------
# synthetic controls


def flat_control() -> AnalyticProfile:
    """f = 1, g = 1, s = 0, eps = 0: the flat metric dt^2 + dpsi^2 + du^2 + dv^2."""
    params = CaseParams(n=2, epsilon=0, A=1, s=0, case=CaseTag.PRODUCT)
    one = lambda t: np.ones_like(t)
    zero = lambda t: np.zeros_like(t)
    return AnalyticProfile(params, 3.0, one, zero, zero, one, zero, zero)


def einstein_control() -> AnalyticProfile:
    """S^2 x S^2 with unit round factors: f = sin t, g = sqrt 2, s = 0, eps = 1."""
    params = CaseParams(n=2, epsilon=1, A=1, s=0, case=CaseTag.PRODUCT)
    r2 = np.sqrt(2.0)
    return AnalyticProfile(
        params,
        np.pi,
        np.sin,
        np.cos,
        lambda t: -np.sin(t),
        lambda t: np.full_like(t, r2),
        lambda t: np.zeros_like(t),
        lambda t: np.zeros_like(t),
    )


def perturbed_profile(spec, amplitude: float = 0.01, k: int = 1):
    """Reconstruct ``spec`` with z multiplied by 1 + amplitude sin(k pi (u - x)/(y - x))."""
    from ..profiles.reconstruct import Profile
    from ..profiles.zmodel import PerturbedZModel, zmodel_for

    return Profile(spec, model=PerturbedZModel(zmodel_for(spec), amplitude, spec.x, spec.y, k), validate=False)


