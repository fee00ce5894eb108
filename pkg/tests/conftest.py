import pytest
from hypothesis import settings

from gcgeom import catalog
from gcgeom.expr import Chart, SamplePlan

from .gate import LINES

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")


@pytest.fixture(scope="session")
def plan():
    return SamplePlan()


@pytest.fixture(scope="session")
def entries(plan):
    return {name: catalog.load(name, plan) for name in catalog.names()}


@pytest.fixture
def r3():
    return Chart(("x", "y", "z"), ((-1.0, 1.0),) * 3, "r3")


def pytest_terminal_summary(terminalreporter):
    if not LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(LINES):
        terminalreporter.write_line(LINES[n])
