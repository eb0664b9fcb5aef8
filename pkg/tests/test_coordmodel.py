import numpy as np
import pytest

from grayforge.coordmodel.chart import BaseChart, ChartModel, ChartPoint, base_scalar_curvature
from grayforge.coordmodel.checks import (
    curvature_at,
    cyclic_condition_check,
    einstein_control,
    flat_control,
    frame_sectionals,
    geodesic_check,
    hermitian_algebra,
    hermitian_check,
    kaehler_nabla_rho_check,
    mean_curvature_check,
    metric_at,
    metric_partials_at,
    perturbed_profile,
    random_points,
    t_line_check,
)
from grayforge.curvature import ricci_eigenvalue_arrays, sectional_components
from grayforge.errors import CaseMismatch, ChartBoundary
from grayforge.profiles.reconstruct import Profile, ProfileGrid

from conftest import solved_spec


def chart_for(name):
    return ChartModel(Profile(solved_spec(name)))


def grid_at(M, t):
    """A ProfileGrid holding the closed-form profile at the sorted times t."""
    t = np.sort(t)
    pv = M.profile.evaluate(t, polish=True)
    return ProfileGrid.from_arrays(
        M.params, t, pv["f"], pv["fPrime"], pv["fSecond"], pv["g"], pv["gPrime"], pv["gSecond"]
    ), t


def sample_point(M, fraction=0.4):
    u0 = np.pi / 2 if M.params.epsilon == 1 else 0.8
    return ChartPoint(fraction * M.L, 0.3, u0, 0.5)


@pytest.mark.parametrize("eps", [-1, 0, 1])
def test_base_scalar_curvature_normalization(eps):
    u = np.array([0.6, 1.1, 1.4]) if eps != 0 else np.array([-0.5, 0.0, 0.7])
    assert np.allclose(base_scalar_curvature(eps, u), 4 * eps, atol=1e-6)


@pytest.mark.parametrize("eps", [-1, 0, 1])
def test_connection_form_curvature(eps):
    base = BaseChart(eps, 0.7)
    u = np.linspace(0.3, 1.3, 11)
    assert np.allclose(base.da(u), 0.7 * base.kaehler_form(u), rtol=1e-15, atol=0)


def test_metric_is_positive_definite(n2_case):
    M = chart_for(n2_case)
    X = random_points(M, 100, np.random.default_rng(1))
    G = M.metric(X)
    assert np.allclose(G, np.transpose(G, (0, 2, 1)))
    assert np.all(np.linalg.eigvalsh(G) > 0)


def test_metric_partials_against_differences():
    M = chart_for("sphere-minus")
    p = sample_point(M)
    dg = metric_partials_at(p, M)
    X = p.as_array()
    h = 1e-6
    for m in (0, 2):
        e = np.zeros(4)
        e[m] = h
        fd = (metric_at(ChartPoint(*(X + e)), M) - metric_at(ChartPoint(*(X - e)), M)) / (2 * h)
        assert np.allclose(fd, dg[m], atol=1e-7)
    assert np.all(dg[1] == 0) and np.all(dg[3] == 0)


def test_chart_boundary_and_dimension_guard():
    M = chart_for("sphere-minus")
    with pytest.raises(ChartBoundary):
        metric_at(ChartPoint(0.5 * M.L, 0.0, 1e-4, 0.0), M)
    with pytest.raises(ChartBoundary):
        metric_at(ChartPoint(-0.1, 0.0, 1.0, 0.0), M)
    with pytest.raises(CaseMismatch):
        chart_for("kaehler-n3")


def test_ricci_eigenvalues_match_formula(n2_case):
    M = chart_for(n2_case)
    rng = np.random.default_rng(0)
    X = random_points(M, 20, rng)
    order = np.argsort(X[:, 0])
    X = X[order]
    grid, t = grid_at(M, X[:, 0])
    expected = np.stack(ricci_eigenvalue_arrays(grid), axis=1)
    scale = np.abs(expected).max()
    for i, x in enumerate(X):
        R = curvature_at(ChartPoint(*x), M).ricci_frame
        got = np.array([R[0, 0], R[1, 1], R[2, 2]])
        assert np.abs(got - expected[i]).max() < 1e-4 * max(scale, 1.0)
        assert R[3, 3] == pytest.approx(R[2, 2], abs=1e-4 * max(scale, 1.0))
        off = R - np.diag(np.diag(R))
        assert np.abs(off).max() < 1e-4 * max(scale, 1.0)


def test_sectional_curvatures_match_formula(n2_case):
    M = chart_for(n2_case)
    X = random_points(M, 5, np.random.default_rng(3))
    grid, t = grid_at(M, X[:, 0])
    X = X[np.argsort(X[:, 0])]
    for i, x in enumerate(X):
        got = frame_sectionals(ChartPoint(*x), M)
        want = sectional_components(grid, i)
        for key in ("H_xi", "H_X", "JH_U", "X_JX"):
            assert got[key] == pytest.approx(want[key], abs=1e-4 * max(1.0, abs(want[key])))


def test_flat_control_is_flat():
    M = ChartModel(flat_control())
    pc = curvature_at(ChartPoint(1.0, 0.2, 0.3, 0.4), M)
    assert np.abs(pc.riemann).max() < 1e-6
    assert abs(pc.scalar) < 1e-6


def test_einstein_control_has_unit_ricci():
    M = ChartModel(einstein_control())
    pc = curvature_at(ChartPoint(1.2, 0.2, 1.3, 0.4), M)
    assert np.allclose(pc.ricci_frame, np.eye(4), atol=1e-6)


@pytest.mark.parametrize("name", ["kaehler-n2", "sphere-minus", "cp2-minus", "product-n2"])
def test_cyclic_condition_on_solutions(name):
    M = chart_for(name)
    assert cyclic_condition_check(sample_point(M), M) < 1e-4


def test_cyclic_condition_einstein_control():
    M = ChartModel(einstein_control())
    assert cyclic_condition_check(ChartPoint(1.2, 0.2, 1.3, 0.4), M) < 1e-6


def test_cyclic_condition_detects_perturbation(n2_case):
    # The defect of a sinusoidal perturbation varies along t; 0.4 L sits away
    # from its small values for every case here.
    spec = solved_spec(n2_case)
    M = ChartModel(perturbed_profile(spec, 0.01))
    assert cyclic_condition_check(sample_point(M), M) > 1e-2


@pytest.mark.parametrize("eps_sign", [-1, 1])
def test_hermitian_structure(n2_case, eps_sign):
    M = chart_for(n2_case)
    for x in random_points(M, 10, np.random.default_rng(5)):
        alg = hermitian_algebra(ChartPoint(*x), M, eps_sign)
        assert alg["J2"] < 1e-12 and alg["orthogonal"] < 1e-12
    assert hermitian_check(sample_point(M), M, eps_sign) < 1e-4


def test_horizontal_mean_curvature():
    M = chart_for("sphere-minus")
    res = mean_curvature_check(sample_point(M), M)
    assert res["residual"] < 1e-4
    assert abs(res["xi_component"]) < 1e-8


def test_kaehler_nabla_rho_coefficient():
    M = chart_for("kaehler-n2")
    res = kaehler_nabla_rho_check(sample_point(M, 0.5), M, eps_sign=1)
    assert res["coefficient"] == pytest.approx(1 / 12, rel=1e-5)
    assert res["residual_at_1_12"] < 1e-4


def test_t_line_is_a_geodesic_with_constant_phi():
    M = chart_for("sphere-minus")
    res = t_line_check(M, steps=1000)
    assert res["transverseDrift"] < 1e-10
    assert res["phiVariation"] < 1e-8
    assert res["phiVsEigenvalues"] < 1e-6
    assert res["bridgeDefect"] < 1e-12


def test_short_geodesic_run_is_reproducible():
    M = chart_for("product-n2")
    a = geodesic_check(M, count=4, steps=400, horizon=0.5, seed=7)
    b = geodesic_check(M, count=4, steps=400, horizon=0.5, seed=7)
    assert a.to_dict() == b.to_dict()
    assert a.geodesicCount == 4 and a.seed == 7
    assert a.speedDrift < 1e-9
    assert a.killingDrift < 1e-6
