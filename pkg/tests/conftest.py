import math

import numpy as np
import pytest

from siss.generator import Direction, b2_tensor_generator
from siss.lattice import build_lattice, reference_signal
from siss.sampling import UniformDensity


@pytest.fixture(scope="session")
def gen():
    return b2_tensor_generator()


@pytest.fixture(scope="session")
def grid9():
    return build_lattice(1, 0.5)


@pytest.fixture(scope="session")
def sig5():
    return reference_signal()


@pytest.fixture(scope="session")
def d513():
    return Direction.from_vector(5, 12)


@pytest.fixture(scope="session")
def uniform():
    return UniformDensity(0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def steep_theta():
    return math.atan2(12, 5)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
