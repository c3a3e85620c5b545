import pytest

from chemrheo.harness.presets import preset
from chemrheo.solver import run


@pytest.fixture(scope="session")
def synovial_traj():
    return run(preset("synovial"))


@pytest.fixture(scope="session")
def taylor_green_traj():
    return run(preset("taylor_green"))


@pytest.fixture(scope="session")
def heat_traj():
    return run(preset("heat_only"))


@pytest.fixture(scope="session")
def electro_traj():
    return run(preset("electro"))


_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, title, passed, detail=""):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d} {title}: {detail}"
        print(line)
        _ACCEPTANCE.append((number, line))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
