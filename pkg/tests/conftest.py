from fractions import Fraction

import pytest

from natquant.analysis import dist_a, dist_b, dist_c, paper_fixtures, plain_geometric
from natquant.measure import GeometricTail, make_distribution

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def distA():
    return dist_a()


@pytest.fixture
def distB():
    return dist_b()


@pytest.fixture
def distC():
    return dist_c()


@pytest.fixture
def geometric():
    return plain_geometric()


@pytest.fixture
def two_point():
    return make_distribution([Fraction(1, 2), Fraction(1, 2)])


@pytest.fixture(params=[fx.name for fx in paper_fixtures()])
def fixture_dist(request):
    return {fx.name: fx.dist for fx in paper_fixtures()}[request.param]


def third_tail():
    """Head 1/2 then 3 * (1/3)^j from 2: a non-dyadic tail of mass 1/2."""
    return make_distribution([Fraction(1, 2)], GeometricTail(2, Fraction(3), Fraction(1, 3)))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
