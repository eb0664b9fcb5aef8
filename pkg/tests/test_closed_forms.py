from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grayforge.errors import CaseMismatch, DomainError
from grayforge.profiles.closed_forms import eval_F, eval_F_prime, eval_z, eval_z_h, eval_z_prime, ode_rhs
from grayforge.profiles.types import CaseParams, SolutionSpec
from grayforge.profiles.zmodel import zmodel_for

from conftest import CASE_BUILDERS, solved_spec


def sphere_spec(n, eta, C, D, E, x=0.1, y=0.5):
    eps, A = (eta, 1) if eta != 0 else (0, 1)
    p = CaseParams(n=n, epsilon=eps, A=A, s=Fraction(1), case="sphere")
    if A == 1:
        x, y = 1.5, 2.5
    return SolutionSpec(p, C, D, E, x, y)


def rk4(rhs, u0, z0, u1, steps):
    """Classical fourth-order Runge-Kutta; returns the grid and the solution."""
    us = np.linspace(u0, u1, steps + 1)
    zs = np.empty_like(us)
    zs[0] = z0
    h = us[1] - us[0]
    z = z0
    for i in range(steps):
        u = us[i]
        k1 = rhs(u, z)
        k2 = rhs(u + h / 2, z + h * k1 / 2)
        k3 = rhs(u + h / 2, z + h * k2 / 2)
        k4 = rhs(u + h, z + h * k3)
        z = z + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        zs[i + 1] = z
    return us, zs


def test_F_constant_only():
    p = CaseParams(n=2, epsilon=0, A=1, s=Fraction(1), case="sphere")
    spec = SolutionSpec(p, 0.0, 0.0, 5.0, 1.5, 2.0)
    assert eval_F(0.3, spec) == 5.0
    assert eval_F(-2.7, spec) == 5.0


def test_F_at_one():
    spec = sphere_spec(2, 1, 0.0, 0.0, 0.0)
    assert eval_F(1.0, spec) == pytest.approx(-4.0, abs=1e-15)


@pytest.mark.parametrize("t", [0.3, 0.7, 1.4, -0.6])
def test_F_prime_matches_central_difference(t):
    spec = sphere_spec(3, 1, 0.7, -1.3, 0.2)
    d = 1e-6
    fd = (eval_F(t + d, spec) - eval_F(t - d, spec)) / (2 * d)
    assert fd == pytest.approx(eval_F_prime(t, spec), rel=1e-7)


def test_F_against_rk4_quadrature():
    spec = sphere_spec(3, 1, 1.0, 1.0, 0.0)
    _, w = rk4(lambda t, _: eval_F_prime(t, spec), 0.25, eval_F(0.25, spec), 0.5, 2000)
    assert w[-1] == pytest.approx(eval_F(0.5, spec), abs=1e-9)


def test_poles_raise():
    spec = sphere_spec(2, 1, 0.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        eval_F(0.0, spec)
    with pytest.raises(DomainError):
        eval_z(1.0, spec)
    kspec = solved_spec("kaehler-n2")
    with pytest.raises(DomainError):
        eval_z(-0.5, kspec)
    with pytest.raises(CaseMismatch):
        eval_F(0.5, kspec)


@pytest.mark.parametrize("name", ["sphere-minus", "sphere-plus", "cp2-plus", "kaehler-n2", "product-n4-neg"])
def test_z_prime_matches_central_difference(name):
    spec = solved_spec(name)
    u = np.linspace(spec.x, spec.y, 9)[1:-1]
    d = 1e-6 * (spec.y - spec.x)
    fd = (eval_z(u + d, spec) - eval_z(u - d, spec)) / (2 * d)
    scale = np.max(np.abs(eval_z_prime(u, spec)))
    assert np.max(np.abs(fd - eval_z_prime(u, spec))) < 1e-6 * scale


@pytest.mark.parametrize("name", sorted(CASE_BUILDERS))
def test_closed_form_solves_its_ode(name):
    spec = solved_spec(name)
    u = np.linspace(spec.x, spec.y, 41)[1:-1]
    u = u[np.abs(u) > 1e-3]
    lhs = eval_z_prime(u, spec)
    rhs = ode_rhs(u, eval_z(u, spec), spec)
    assert np.max(np.abs(lhs - rhs)) < 1e-9 * max(1.0, np.max(np.abs(lhs)))


@pytest.mark.parametrize("name", sorted(CASE_BUILDERS))
def test_factored_model_matches_literal_formula(name):
    spec = solved_spec(name)
    u = np.linspace(spec.x, spec.y, 51)[1:-1]
    u = u[np.abs(u) > 1e-2]
    model = zmodel_for(spec)
    d = model.derivs(u)
    scale = max(1.0, np.max(np.abs(eval_z(u, spec))))
    assert np.max(np.abs(d[0] - eval_z(u, spec))) < 1e-11 * scale
    assert np.max(np.abs(d[1] - eval_z_prime(u, spec))) < 1e-9 * max(1.0, np.max(np.abs(d[1])))


@pytest.mark.parametrize("name", ["sphere-minus", "sphere-plus", "cp2-minus", "cp3-minus"])
def test_rescaled_and_unscaled_variables_agree(name):
    spec = solved_spec(name)
    r = float(spec.params.r)
    u = np.linspace(spec.x, spec.y, 21)[1:-1]
    assert np.allclose(eval_z_h(r * u, spec), eval_z(u, spec), rtol=1e-10, atol=1e-12)


def test_odd_symmetric_seed_gives_even_z():
    spec = solved_spec("sphere-symmetric")
    u = np.linspace(0.01, -spec.x * 0.999, 200)
    assert np.max(np.abs(eval_z(u, spec) - eval_z(-u, spec))) < 1e-12


@settings(max_examples=40, deadline=None)
@given(
    C=st.floats(-5, 5),
    D=st.floats(-5, 5),
    E=st.floats(-5, 5),
    u=st.floats(0.2, 3.0),
)
def test_kaehler_closed_form_solves_sign_corrected_ode(C, D, E, u):
    p = CaseParams(n=3, epsilon=1, A=0, s=Fraction(1), case="kaehler")
    spec = SolutionSpec(p, C, D, E, 0.1, 4.0)
    lhs = eval_z_prime(u, spec) + 2 * 3 * eval_z(u, spec) / u
    rhs = 2 / u - C * u**3 - D * u
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9 * (1 + abs(E) / u**7))
