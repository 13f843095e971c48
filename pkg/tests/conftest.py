import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from surfdec.lattice import build_square_board  # noqa: E402


@pytest.fixture(scope="session")
def d5():
    return build_square_board(5)


@pytest.fixture(scope="session")
def d9():
    return build_square_board(9)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[1])):
            terminalreporter.write_line(ACCEPTANCE[key])
