import pytest
from hypothesis import settings

from zeromass.green import builtin_init, fixed_point_solve
from zeromass.scaling import Parameters
from zeromass.shooting import bisect_ground_state, find_bracket

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def p4():
    return Parameters(3, 1, 1, 4)


@pytest.fixture(scope="session")
def picard_p4(p4):
    return fixed_point_solve(p4, builtin_init("expdecay"))


@pytest.fixture(scope="session")
def bracket_p4(p4):
    return find_bracket(p4)


@pytest.fixture(scope="session")
def shooting_p4(p4, bracket_p4):
    return bisect_ground_state(p4, bracket_p4, rel_width=1e-15)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda x: int(x.split()[2].rstrip(':'))):
            terminalreporter.write_line(line)
