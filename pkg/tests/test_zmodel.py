import numpy as np
import pytest

from grayforge.profiles.zmodel import PerturbedZModel, zmodel_for

from conftest import CASE_BUILDERS, solved_spec


@pytest.mark.parametrize("name", sorted(CASE_BUILDERS))
def test_derivative_chain_against_finite_differences(name):
    spec = solved_spec(name)
    model = zmodel_for(spec)
    u = np.linspace(spec.x, spec.y, 7)[1:-1]
    d = 1e-4 * (spec.y - spec.x)
    vals = model.derivs(u)
    for k in range(1, 4):
        plus = model.derivs(u + d)[k - 1]
        minus = model.derivs(u - d)[k - 1]
        fd = (plus - minus) / (2 * d)
        scale = max(1.0, float(np.max(np.abs(vals[k]))))
        assert np.max(np.abs(fd - vals[k])) < 1e-5 * scale


def test_projective_model_is_regular_at_the_collapsing_end():
    spec = solved_spec("cp2-minus")
    model = zmodel_for(spec)
    d = model.derivs(np.array([1.0]))
    assert d[0, 0] == 0.0
    # z'(1) = 2A/n under the rescaled variable
    assert d[1, 0] == pytest.approx(-1.0, rel=1e-10)
    assert np.all(np.isfinite(d))


def test_perturbation_keeps_zeros_and_slopes():
    spec = solved_spec("sphere-minus")
    base = zmodel_for(spec)
    pert = PerturbedZModel(base, 0.01, spec.x, spec.y)
    ends = np.array([spec.x, spec.y])
    assert np.allclose(pert.derivs(ends)[:2], base.derivs(ends)[:2], atol=1e-12)
    mid = np.array([0.5 * (spec.x + spec.y)])
    assert pert(mid)[0] == pytest.approx(1.01 * base(mid)[0], rel=1e-12)
