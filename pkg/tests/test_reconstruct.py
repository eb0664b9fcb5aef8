import numpy as np
import pytest
from scipy.integrate import quad

from grayforge.errors import CaseMismatch
from grayforge.profiles.closed_forms import eval_z
from grayforge.profiles.reconstruct import Profile, ProfileGrid, grid_identities, reconstruct_profile
from grayforge.profiles.types import CaseParams, SolutionSpec
from grayforge.profiles.zmodel import zmodel_for

from conftest import CASE_BUILDERS, solved_grid, solved_spec


def arc_length_oracle(spec):
    """L = k * int_x^y du / sqrt(z), integrated in the angle u = x + (y - x)(1 - cos a)/2.

    The substitution absorbs both inverse square-root endpoint singularities,
    leaving the smooth integrand sqrt((u - x)(y - u)/z).
    """
    model = zmodel_for(spec)
    x, y = spec.x, spec.y
    k = float(spec.params.r) if spec.params.case.uses_h_substitution else 1.0
    dz = model.derivs(np.array([x, y]))[1]

    def smooth(a):
        u = x + (y - x) * (1 - np.cos(a)) / 2
        if a < 1e-4:
            return np.sqrt((y - x) / dz[0])
        if np.pi - a < 1e-4:
            return np.sqrt((y - x) / -dz[1])
        z = float(model(np.array([u]))[0])
        return np.sqrt((u - x) * (y - u) / z)

    val, _ = quad(smooth, 0.0, np.pi, epsabs=0, epsrel=1e-12, limit=200)
    return k * val


@pytest.mark.parametrize("name", sorted(CASE_BUILDERS))
def test_arc_length_against_quadrature(name):
    spec = solved_spec(name)
    assert Profile(spec).L == pytest.approx(arc_length_oracle(spec), rel=1e-10)


@pytest.mark.parametrize("name", sorted(CASE_BUILDERS))
def test_grid_invariants(name):
    grid = solved_grid(name)
    assert len(grid) == 2048
    assert grid.t[0] == 0.0 and grid.t[-1] == pytest.approx(grid.L, rel=1e-15)
    assert np.all(np.diff(grid.t) > 0)
    inner = slice(1, -1)
    assert np.all(grid.f[inner] > 0)
    assert np.all(grid.g[inner] > 0)
    ids = grid_identities(grid)
    assert ids["z"] < 1e-12
    if "g2" in ids:
        assert ids["g2"] < 1e-12


@pytest.mark.parametrize("name", sorted(CASE_BUILDERS))
def test_inverse_map_round_trip(name):
    prof = Profile(solved_spec(name))
    t = np.linspace(0.01, 0.99, 37) * prof.L
    u = prof.u_of_t(t, polish=True)
    assert np.max(np.abs(prof.t_of_u(u) - t)) < 1e-11 * prof.L


@pytest.mark.parametrize("name", ["sphere-minus", "kaehler-n2", "product-n2"])
def test_analytic_derivatives_against_finite_differences(name):
    prof = Profile(solved_spec(name))
    t = np.linspace(0.1, 0.9, 17) * prof.L
    d = 1e-5 * prof.L
    plus, minus, mid = (prof.evaluate(t + d, polish=True), prof.evaluate(t - d, polish=True), prof.evaluate(t, polish=True))
    for base, deriv in (("f", "fPrime"), ("g", "gPrime"), ("fPrime", "fSecond"), ("gPrime", "gSecond")):
        fd = (plus[base] - minus[base]) / (2 * d)
        scale = max(1.0, float(np.max(np.abs(mid[deriv]))))
        assert np.max(np.abs(fd - mid[deriv])) < 1e-6 * scale


def test_values_follow_the_closed_form():
    spec = solved_spec("product-n2")
    grid = solved_grid("product-n2")
    inner = slice(5, -5)
    assert np.allclose(grid.z[inner], eval_z(grid.u[inner], spec), rtol=1e-12)


def test_grid_size_and_determinism():
    spec = solved_spec("cp2-plus")
    a = reconstruct_profile(spec, 64)
    b = reconstruct_profile(spec, 64)
    assert len(a) == 64
    assert np.array_equal(a.f, b.f) and np.array_equal(a.t, b.t)


def test_constant_kaehler_z_is_rejected():
    p = CaseParams(n=2, epsilon=1, A=0, s=1, case="kaehler")
    spec = SolutionSpec(p, 0.0, 0.0, 0.0, 1.0, 2.0)
    with pytest.raises(CaseMismatch):
        Profile(spec)


def test_grid_rejects_bad_arrays():
    p = CaseParams(n=2, epsilon=0, A=1, s=0, case="product")
    t = np.linspace(0, 1, 5)
    with pytest.raises(ValueError):
        ProfileGrid.from_arrays(p, t[::-1], t, t, t, t, t, t)
    with pytest.raises(ValueError):
        ProfileGrid.from_arrays(p, t, t[:3], t, t, t, t, t)
