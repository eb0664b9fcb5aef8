"""Ricci eigenvalues and Gray-condition diagnostics on a sampled profile.

For g = dt^2 + f^2 theta^2 + g^2 h over a Kaehler-Einstein base of complex
dimension n - 1 with Ric_h = 2 eps h and d theta = s Omega, the Ricci tensor is
diagonal in the frame (d/dt, xi/f, horizontal) with eigenvalues

    lambda0 = -2(n-1) g''/g - f''/f
    lambda1 = -f''/f + 2(n-1)(s^2 f^2/(4 g^4) - f'g'/(fg))
    lambda2 = -g''/g + (s^2 f^2/(4 g^4) - f'g'/(fg)) + 2 eps/g^2
              - 3 s^2 f^2/(4 g^4) - (2n-3) g'^2/g^2

of multiplicities 1, 1 and 2(n-1). The metrics of interest have
lambda0 = lambda1 =: lambda and lambda2 =: mu.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EndpointUndefined
from .profiles.closed_forms import mu_coefficients
from .profiles.reconstruct import Profile, ProfileGrid
from .profiles.types import CaseTag, SolutionSpec

ENDPOINT_FRACTION = 1e-3
ANALYTIC_TOL = 1e-8
FD_TOL = 1e-4
SMOOTHNESS_TOL = 1e-6


def interior_mask(grid: ProfileGrid, fraction: float = ENDPOINT_FRACTION) -> np.ndarray:
    """Samples farther than ``fraction * L`` from both ends."""
    t0 = grid.t[0]
    margin = fraction * grid.L
    return (grid.t - t0 > margin) & (grid.t[-1] - grid.t > margin)


def _parts(grid: ProfileGrid, idx=slice(None)):
    f, fp, fpp = grid.f[idx], grid.fPrime[idx], grid.fSecond[idx]
    g, gp, gpp = grid.g[idx], grid.gPrime[idx], grid.gSecond[idx]
    return f, fp, fpp, g, gp, gpp


def _eigs(params, f, fp, fpp, g, gp, gpp):
    n, eps, s = params.n, params.epsilon, float(params.s)
    twist = s * s * f * f / (4 * g**4)
    mixed = twist - (fp / f) * (gp / g)
    lam0 = -2 * (n - 1) * gpp / g - fpp / f
    lam1 = -fpp / f + 2 * (n - 1) * mixed
    lam2 = -gpp / g + mixed + 2 * eps / g**2 - 3 * twist - (2 * n - 3) * (gp / g) ** 2
    return lam0, lam1, lam2


def _check_index(grid: ProfileGrid, i: int):
    if i < 0:
        i += len(grid)
    if not 0 <= i < len(grid):
        raise IndexError(f"sample index {i} out of range")
    if grid.f[i] == 0.0 or grid.g[i] == 0.0 or i in (0, len(grid) - 1) and grid.spec is not None:
        raise EndpointUndefined("f or g vanishes at the axes; the eigenvalues are undefined there")
    return i


def ricci_eigenvalues(grid: ProfileGrid, i: int) -> tuple[float, float, float]:
    """(lambda0, lambda1, lambda2) at sample ``i``."""
    i = _check_index(grid, i)
    lam = _eigs(grid.params, *_parts(grid, slice(i, i + 1)))
    return tuple(float(v[0]) for v in lam)


def ricci_eigenvalue_arrays(grid: ProfileGrid):
    """Eigenvalue arrays over all samples; NaN where f or g vanishes."""
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = _eigs(grid.params, *_parts(grid))
    bad = (grid.f == 0.0) | (grid.g == 0.0)
    if grid.spec is not None:
        bad[[0, -1]] = True
    return tuple(np.where(bad, np.nan, v) for v in lam)


def constraint_62_residual(grid: ProfileGrid) -> np.ndarray:
    """g''/g + s^2 f^2/(4 g^4) - f'g'/(fg) on every sample (NaN at the axes)."""
    f, fp, fpp, g, gp, gpp = _parts(grid)
    s = float(grid.params.s)
    with np.errstate(divide="ignore", invalid="ignore"):
        res = gpp / g + s * s * f * f / (4 * g**4) - (fp / f) * (gp / g)
    bad = (f == 0.0) | (g == 0.0)
    if grid.spec is not None:
        bad[[0, -1]] = True
    return np.where(bad, np.nan, res)


@dataclass(frozen=True)
class CurvatureReport:
    """Pointwise eigenvalues and the aggregated Gray-condition statistics.

    Relative quantities are divided by ``scale`` = max(|lambda|, |mu|) over
    the interior samples.
    """

    lambda0: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    tau: np.ndarray
    interior: np.ndarray
    scale: float
    grayConstant: float
    grayDefect: float
    lambdaGap01: float
    constraintDefect: float
    muQuadResidual: float
    prop2aCoefficient: float
    prop2aDefect: float
    eigGapMin: float
    eigGapMax: float
    einsteinDegenerate: bool
    tauIdentityDefect: float
    muCoefficients: tuple[float, float] | None

    def summary(self) -> dict:
        return {
            "scale": self.scale,
            "grayConstant": self.grayConstant,
            "grayDefect": self.grayDefect,
            "lambdaGap01": self.lambdaGap01,
            "constraintDefect": self.constraintDefect,
            "muQuadResidual": self.muQuadResidual,
            "prop2aCoefficient": self.prop2aCoefficient,
            "prop2aDefect": self.prop2aDefect,
            "eigGapMin": self.eigGapMin,
            "eigGapMax": self.eigGapMax,
            "einsteinDegenerate": self.einsteinDegenerate,
            "tauIdentityDefect": self.tauIdentityDefect,
        }

    def failures(self, tol: float = ANALYTIC_TOL) -> list[str]:
        """Names of the checks exceeding ``tol`` (relative)."""
        names = []
        for key in ("grayDefect", "lambdaGap01", "constraintDefect", "prop2aDefect"):
            if not getattr(self, key) <= tol:
                names.append(key)
        if self.muCoefficients is not None and not self.muQuadResidual <= tol:
            names.append("muQuadResidual")
        return names


def gray_criteria(grid: ProfileGrid, spec: SolutionSpec | None = None) -> CurvatureReport:
    """Evaluate the Gray-condition diagnostics over the interior samples.

    ``grayDefect`` is the spread (max - min) of lambda0 - 2 mu;
    ``prop2aDefect`` is the largest deviation of lambda - mu from its
    least-squares fit kappa g^2, the well-conditioned form of asking that
    (lambda - mu)/g^2 be constant. With ``spec`` absent the mu = C g^2 + D
    check is skipped.
    """
    spec = spec if spec is not None else grid.spec
    n = grid.params.n
    lam0, lam1, lam2 = ricci_eigenvalue_arrays(grid)
    lam = 0.5 * (lam0 + lam1)
    mu = lam2
    tau = lam0 + lam1 + 2 * (n - 1) * lam2
    mask = interior_mask(grid) & np.isfinite(lam) & np.isfinite(mu)
    l0, l1, m, g = lam0[mask], lam1[mask], mu[mask], grid.g[mask]
    lm = lam[mask]
    scale = float(max(np.max(np.abs(lm)), np.max(np.abs(m)), 1e-300))
    gray = l0 - 2 * m
    gray_const = float(np.mean(gray))
    gray_defect = float((np.max(gray) - np.min(gray)) / scale)
    gap01 = float(np.max(np.abs(l0 - l1)) / scale)
    c62 = constraint_62_residual(grid)[mask]
    constraint = float(np.max(np.abs(c62)) / scale)
    diff = lm - m
    g2 = g * g
    kappa = float(np.dot(diff, g2) / np.dot(g2, g2))
    prop2a = float(np.max(np.abs(diff - kappa * g2)) / scale)
    gap_min = float(np.min(np.abs(diff)) / scale)
    gap_max = float(np.max(np.abs(diff)) / scale)
    tau_id = float(np.max(np.abs(tau[mask] - (2 * l0 + 2 * (n - 1) * m))) / scale)
    if spec is not None:
        Cg, Dg = mu_coefficients(spec)
        muq = float(np.max(np.abs(m - (Cg * g2 + Dg))) / scale)
        coeffs = (Cg, Dg)
    else:
        muq, coeffs = float("nan"), None
    return CurvatureReport(
        lambda0=lam0,
        lambda1=lam1,
        lambda2=lam2,
        lam=lam,
        mu=mu,
        tau=tau,
        interior=mask,
        scale=scale,
        grayConstant=gray_const,
        grayDefect=gray_defect,
        lambdaGap01=gap01,
        constraintDefect=constraint,
        muQuadResidual=muq,
        prop2aCoefficient=kappa,
        prop2aDefect=prop2a,
        eigGapMin=gap_min,
        eigGapMax=gap_max,
        einsteinDegenerate=gap_max <= 1e-12,
        tauIdentityDefect=tau_id,
        muCoefficients=coeffs,
    )


def sectional_components(grid: ProfileGrid, i: int) -> dict[str, float | None]:
    """Named curvature components at sample ``i``.

    ``H_xi``, ``H_X`` and ``JH_U`` are the sectional curvatures of the planes
    (d/dt, xi), (d/dt, horizontal) and (xi, horizontal). ``X_JX`` is the
    curvature of a complex horizontal plane, available only for n = 2 where
    the base is a surface of Gauss curvature 2 eps. ``circle_oneill`` is the
    O'Neill correction -3 s^2 f^2/(4 g^4) of a complex horizontal plane of the
    fibre circle bundle. ``circle_ricci_xi`` is the Ricci curvature of the
    unit fibre direction of the circle bundle alone, 2(n-1) s^2 f^2/(4 g^4),
    while ``circle_ricci_xi_halved`` is that value divided by two, the
    normalization in which the circle-bundle eigenvalue is sometimes quoted;
    the two are kept apart on purpose.
    """
    i = _check_index(grid, i)
    f, fp, fpp, g, gp, gpp = (float(v[0]) for v in _parts(grid, slice(i, i + 1)))
    p = grid.params
    s, eps, n = float(p.s), p.epsilon, p.n
    twist = s * s * f * f / (4 * g**4)
    out = {
        "H_xi": -fpp / f,
        "H_X": -gpp / g,
        "JH_U": twist - fp * gp / (f * g),
        "X_JX": (2 * eps / g**2 - 3 * twist - gp * gp / (g * g)) if n == 2 else None,
        "circle_oneill": -3 * twist,
        "circle_ricci_xi": 2 * (n - 1) * twist,
        "circle_ricci_xi_halved": (n - 1) * twist,
    }
    return out


def lambda0_from_components(comp: dict, n: int) -> float:
    """Reassemble lambda0 = 2(n-1) K(H, X) + K(H, xi)."""
    return 2 * (n - 1) * comp["H_X"] + comp["H_xi"]


def perturb_f(grid: ProfileGrid, amplitude: float = 0.01, k: int = 1) -> ProfileGrid:
    """Multiply f by 1 + a sin(k pi t/L) with consistent analytic derivatives."""
    t = grid.t - grid.t[0]
    om = k * np.pi / grid.L
    w = 1.0 + amplitude * np.sin(om * t)
    w1 = amplitude * om * np.cos(om * t)
    w2 = -amplitude * om * om * np.sin(om * t)
    f, fp, fpp = grid.f, grid.fPrime, grid.fSecond
    return ProfileGrid(
        params=grid.params,
        L=grid.L,
        t=grid.t,
        f=f * w,
        g=grid.g,
        h=grid.h,
        z=grid.z,
        fPrime=fp * w + f * w1,
        gPrime=grid.gPrime,
        fSecond=fpp * w + 2 * fp * w1 + f * w2,
        gSecond=grid.gSecond,
        u=grid.u,
        spec=grid.spec,
    )


# smoothness at the two ends
def _neville_at_zero(xs: np.ndarray, ys: np.ndarray) -> float:
    """Value at 0 of the interpolating polynomial through (xs, ys)."""
    p = list(ys)
    m = len(xs)
    for level in range(1, m):
        for j in range(m - level):
            p[j] = (xs[j + level] * p[j] - xs[j] * p[j + 1]) / (xs[j + level] - xs[j])
    return float(p[0])


def _one_sided(fun, base_step: float, parity: str, points: int = 6) -> float:
    """Richardson-style extrapolation of fun(tau) to tau = 0 from tau > 0.

    ``parity`` 'even' extrapolates in tau^2 (fun even in tau), 'any' in tau.
    """
    taus = base_step * np.arange(1, points + 1, dtype=float)
    vals = np.asarray(fun(taus), dtype=float)
    var = taus * taus if parity == "even" else taus
    return _neville_at_zero(var, vals)


def smoothness_check(grid_or_profile, step_fraction: float = 1e-3) -> dict:
    """Extrapolated boundary behaviour at t = 0 and t = L.

    Uses only the values of f and g (not their analytic derivatives):
    f'(0) is the limit of f(t)/t, f'(L) that of -f(L - t)/t, and g'(0+) the
    limit of (g(t) - g(0))/t with g(0) itself extrapolated. When g collapses
    at an end (CP^n), g there and g'(L) are reported together with
    sqrt(n) g'(L), which is the slope measured against the Fubini-Study
    metric of the base, h = n g_FS under the normalization Ric_h = 2h.
    """
    profile = grid_or_profile
    if isinstance(profile, ProfileGrid):
        if profile.spec is None:
            raise ValueError("smoothness_check needs a grid reconstructed from a spec")
        profile = Profile(profile.spec)
    L = profile.L
    step = step_fraction * L

    def f_at(t):
        return profile.evaluate(t, polish=True)["f"]

    def g_at(t):
        return profile.evaluate(t, polish=True)["g"]

    p = profile.params
    out: dict[str, dict] = {}
    f0 = _one_sided(lambda tau: f_at(tau) / tau, step, "even")
    fL = -_one_sided(lambda tau: f_at(L - tau) / tau, step, "even")
    out["fPrime(0)"] = {"value": f0, "target": 1.0}
    out["fPrime(L)"] = {"value": fL, "target": -1.0}
    collapse_end = None
    if p.case is CaseTag.PROJECTIVE_SPACE:
        collapse_end = "L" if p.A == -1 else "0"
    if p.case is not CaseTag.PRODUCT and p.case is not CaseTag.KAEHLER:
        for end in ("0", "L"):
            if end == collapse_end:
                continue
            if end == "0":
                g0 = _one_sided(lambda tau: g_at(tau), step, "even")
                slope = _one_sided(lambda tau: (g_at(tau) - g0) / tau, step, "any")
            else:
                g0 = _one_sided(lambda tau: g_at(L - tau), step, "even")
                slope = -_one_sided(lambda tau: (g_at(L - tau) - g0) / tau, step, "any")
            out[f"gPrime({end}) parity"] = {"value": slope, "target": 0.0}
    if collapse_end is not None:
        n = p.n
        if collapse_end == "L":
            gval = _one_sided(lambda tau: g_at(L - tau), step, "any")
            gslope = -_one_sided(lambda tau: g_at(L - tau) / tau, step, "even")
            sign = -1.0
        else:
            gval = _one_sided(lambda tau: g_at(tau), step, "any")
            gslope = _one_sided(lambda tau: g_at(tau) / tau, step, "even")
            sign = 1.0
        out[f"g({collapse_end})"] = {"value": gval, "target": 0.0}
        out[f"gPrime({collapse_end}) raw"] = {
            "value": gslope,
            "target": sign / np.sqrt(n),
            "informational": True,
        }
        out[f"gPrime({collapse_end}) Fubini-Study"] = {
            "value": gslope * np.sqrt(n),
            "target": sign,
        }
    for entry in out.values():
        entry["residual"] = abs(entry["value"] - entry["target"])
        entry["pass"] = bool(entry["residual"] <= SMOOTHNESS_TOL)
    return out


def smoothness_failures(report: dict) -> list[str]:
    return [k for k, v in report.items() if not v["pass"] and not v.get("informational")]
