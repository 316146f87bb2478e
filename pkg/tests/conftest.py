import numpy as np
import pytest

from posminimax.dcnet import DcNetwork
from posminimax.model import ProblemInstance


@pytest.fixture
def S1():
    """Reference scalar instance with fixed point p = 4.25."""
    return ProblemInstance.scalar(0.9, 0.2, 0.1, 1, 1, 1, 0.1, 0.05)


@pytest.fixture
def S0():
    """Unconstrained scalar instance, p = 1 / (1 - 0.5) = 2."""
    return ProblemInstance.scalar(0.5, 0.3, -0.7, 0, 0, 1, 0, 0)


@pytest.fixture
def SD():
    """Unstable scalar instance; value iteration diverges."""
    return ProblemInstance.scalar(1.1, 0, 0, 0, 0, 1, 0, 0)


@pytest.fixture
def path_network():
    return DcNetwork([1.0, 1.0, 1.0], [(0, 1, 1.0), (1, 2, 1.0)])



_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(passed, detail)``."""
    name = request.node.name

    def record(passed, detail=''):
        _ACCEPTANCE.append((name, bool(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section('acceptance criteria')
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(
            f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
