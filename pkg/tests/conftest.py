import random

import pytest

from condtypes.generators import random_structure
from condtypes.io import load_fixture

_ACCEPTANCE: dict[str, str] = {}


def corpus(seed: int = 20240601, n: int = 100):
    """General random structures plus Dirac-belief ones (deeper refinement chains)."""
    rng = random.Random(seed)
    out = []
    for k in range(n):
        if k % 5 in (3, 4):
            out.append(random_structure(rng, max_states=2, max_types=4, max_events=3, dirac=True, duplicate_rate=0.1))
        else:
            out.append(random_structure(rng, max_states=4, max_types=4, max_events=3))
    return out


@pytest.fixture(scope="session")
def structures():
    return corpus()


@pytest.fixture
def friedenberg():
    return load_fixture("friedenberg")


@pytest.fixture
def one_type():
    return load_fixture("one_type")


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"{status}  {name}")
