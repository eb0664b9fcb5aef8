from fractions import Fraction

import pytest

from grayforge.boundary.solvers import (
    cpn_solve,
    kaehler_solve,
    product_solve,
    sphere_bundle_solve,
    symmetric_solve,
)
from grayforge.profiles.reconstruct import Profile

# One representative solution per regime (plus a few variants). Each entry
# builds a fresh SolutionSpec; the session cache below shares the results.
CASE_BUILDERS = {
    "kaehler-n2": lambda: kaehler_solve(2, Fraction(2, 3)),
    "kaehler-n3": lambda: kaehler_solve(3, Fraction(8, 3)),
    "sphere-minus": lambda: sphere_bundle_solve(2, -1, Fraction(1, 2), 0.5, -1),
    "sphere-plus": lambda: sphere_bundle_solve(2, 1, Fraction(1, 2), 1.5, 1),
    "sphere-symmetric": lambda: symmetric_solve(2, -1, Fraction(1, 2), -0.5),
    "cp2-minus": lambda: cpn_solve(2, -1),
    "cp2-plus": lambda: cpn_solve(2, 1),
    "cp3-minus": lambda: cpn_solve(3, -1),
    "product-n2": lambda: product_solve(2, 1, c=Fraction(2)),
    "product-n4-neg": lambda: product_solve(4, -1, c=Fraction(2)),
    "product-n4-flat": lambda: product_solve(4, 0),
}

N2_CASES = ["kaehler-n2", "sphere-minus", "sphere-plus", "sphere-symmetric", "cp2-minus", "cp2-plus", "product-n2"]

_specs: dict = {}
_grids: dict = {}


def solved_spec(name):
    if name not in _specs:
        _specs[name] = CASE_BUILDERS[name]()
    return _specs[name]


def solved_grid(name, size=2048):
    key = (name, size)
    if key not in _grids:
        _grids[key] = Profile(solved_spec(name)).grid(size)
    return _grids[key]


@pytest.fixture(params=sorted(CASE_BUILDERS))
def case_name(request):
    return request.param


@pytest.fixture(params=N2_CASES)
def n2_case(request):
    return request.param


# Acceptance results, printed once at the end of the run.
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
