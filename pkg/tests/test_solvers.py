from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grayforge.boundary.existence import fcap_poly, q_poly
from grayforge.boundary.solvers import (
    BoundarySearchConfig,
    check_residuals,
    cpn_713_residual,
    cpn_C,
    cpn_solve,
    fcap_root,
    kaehler_root,
    kaehler_solve,
    positivity_scan,
    product_solve,
    sphere_bundle_candidates,
    sphere_bundle_solve,
    symmetric_solve,
)
from grayforge.boundary.existence import kaehler_compat_poly
from grayforge.errors import CaseMismatch, DomainError, InadmissibleC, NoRoot
from grayforge.profiles.closed_forms import eval_z, eval_z_prime, slope_targets
from grayforge.profiles.zmodel import zmodel_for

from conftest import CASE_BUILDERS, solved_spec


@pytest.mark.parametrize("name", sorted(CASE_BUILDERS))
def test_every_solution_meets_boundary_conditions(name):
    spec = solved_spec(name)
    res = check_residuals(spec)
    assert all(abs(v) < 1e-10 for v in res.values())
    assert positivity_scan(spec) > 0


def test_search_config_invariants():
    with pytest.raises(CaseMismatch):
        BoundarySearchConfig(bracketMax=1.0)
    with pytest.raises(CaseMismatch):
        BoundarySearchConfig(tolAbs=0.0)


def test_kaehler_no_root_at_s_two():
    with pytest.raises(NoRoot):
        kaehler_solve(2, Fraction(2))


def test_kaehler_root_bracket_and_residuals():
    spec = kaehler_solve(2, Fraction(2, 3), 1.0)
    cert = kaehler_root(2, Fraction(2, 3))
    poly = kaehler_compat_poly(2, Fraction(2, 3), 1)
    assert cert.lo > 1 and poly.sign_at(cert.lo) == -poly.sign_at(cert.hi) != 0
    x, y, s = spec.x, spec.y, 2 / 3
    assert abs(eval_z(x, spec)) < 1e-10 and abs(eval_z(y, spec)) < 1e-10
    assert abs(x * eval_z_prime(x, spec) - s) < 1e-10
    assert abs(y * eval_z_prime(y, spec) + s) < 1e-10


def test_kaehler_homothety():
    a = kaehler_solve(2, Fraction(2, 3), 1.0)
    b = kaehler_solve(2, Fraction(2, 3), 2.0)
    assert a.y / a.x == pytest.approx(b.y / b.x, rel=1e-15)


def test_sphere_bundle_example_from_negative_abscissa():
    spec = sphere_bundle_solve(2, 1, Fraction(1, 3), -0.2, -1)
    assert all(abs(v) < 1e-10 for v in check_residuals(spec).values())
    assert positivity_scan(spec) > 0


def test_sphere_bundle_reports_every_admissible_branch():
    cands = sphere_bundle_candidates(2, -1, Fraction(1, 2), 0.5, -1)
    assert len(cands) >= 1
    for spec in cands:
        assert all(abs(v) < 1e-10 for v in check_residuals(spec).values())


def test_sphere_bundle_rejects_pole_abscissa():
    with pytest.raises((DomainError, CaseMismatch)):
        sphere_bundle_solve(2, 1, Fraction(1, 3), 0.0, -1)


def test_symmetric_solution_has_vanishing_E_and_positive_centre():
    spec = symmetric_solve(2, 1, Fraction(1, 3), -0.1)
    assert spec.E == 0.0
    assert spec.y == -spec.x
    assert all(abs(v) < 1e-10 for v in check_residuals(spec).values())
    assert float(zmodel_for(spec)(np.array([0.0]))[0]) > 0
    with pytest.raises(DomainError):
        symmetric_solve(2, 1, Fraction(1, 3), 0.3)


@pytest.mark.parametrize("n,A", [(2, -1), (2, 1), (3, -1), (3, 1)])
def test_cpn_imposed_slope_and_713_residual(n, A):
    spec = cpn_solve(n, A)
    model = zmodel_for(spec)
    d = model.derivs(np.array([1.0]))
    assert d[0, 0] == pytest.approx(0.0, abs=1e-12)
    assert d[1, 0] == pytest.approx(2 * A / n, rel=1e-12)
    assert d[1, 0] == pytest.approx(A * float(spec.params.s), rel=1e-12)
    assert abs(cpn_713_residual(spec)) < 1e-10
    if A == -1:
        assert 0 < spec.x < spec.y == 1.0
    else:
        assert spec.x == 1.0 < spec.y


@settings(max_examples=50)
@given(y=st.floats(0.05, 0.9), n=st.integers(2, 6))
def test_cpn_C_is_monotone_in_the_critical_point(y, n):
    xs = np.linspace(y, 1.0, 402)[1:-1]
    diffs = np.diff(cpn_C(xs, y, n, -1))
    assert np.all(diffs > 0) or np.all(diffs < 0)


def test_product_solutions_and_inadmissible_ratios():
    spec = product_solve(2, 1, c=Fraction(2))
    sx, sy = slope_targets(spec)
    assert (sx, sy) == (2.0, -2.0)
    assert spec.y / spec.x == pytest.approx(2.0)
    with pytest.raises(InadmissibleC):
        product_solve(2, -1, c=Fraction(2))
    with pytest.raises(NoRoot):
        product_solve(3, 0, c=Fraction(3, 2))
    with pytest.raises(NoRoot):
        fcap_root(3)


def test_product_flat_base_root_is_certified():
    cert = fcap_root(4)
    F = fcap_poly(4)
    assert F.sign_at(cert.lo) * F.sign_at(cert.hi) < 0
    spec = product_solve(4, 0)
    assert spec.family == pytest.approx(cert.value, rel=1e-14)


def test_q_polynomial_value_n4():
    assert q_poly(4).taylor_at_one(3) == [0, 0, 0, 126]
