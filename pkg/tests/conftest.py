import pytest

from hamext.systems import calogero, oscillator, three_sphere


@pytest.fixture(scope="session")
def osc():
    return oscillator()


@pytest.fixture(scope="session")
def cal():
    return calogero()


@pytest.fixture(scope="session")
def sph():
    return three_sphere()


@pytest.fixture(scope="session")
def builtins(osc, cal, sph):
    return [osc, cal, sph]


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = next((m for k, m in list(sys.modules.items()) if k.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
