import numpy as np
import pytest

from omnisine.cylinder import CylinderModel
from omnisine.synth import make_texture

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def model():
    return CylinderModel(1100, 110)


@pytest.fixture(scope="session")
def texture(model):
    return make_texture(3, model)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def record_criterion():
    """Collects the one-line verdict of an acceptance criterion."""
    def _record(number, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
