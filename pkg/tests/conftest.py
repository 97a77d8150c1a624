import pytest

from ckbateman.weylalg import PhysParams


@pytest.fixture
def params():
    """Reference underdamped parameters used throughout the suite."""
    return PhysParams(m=1.0, gamma=0.2, omega=1.0, hbar=1.0)


@pytest.fixture
def params_alt():
    """A second, less symmetric parameter set."""
    return PhysParams(m=1.7, gamma=0.35, omega=1.3, hbar=0.8)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
