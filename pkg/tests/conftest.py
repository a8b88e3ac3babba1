import math

import numpy as np
import pytest
from scipy.linalg import expm

from cavitycat import jc


def brute_displacement(beta, dim):
    """expm(beta a^dag - conj(beta) a) on a ``dim``-level truncation."""
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)
    return expm(beta * a.conj().T - np.conj(beta) * a)


@pytest.fixture(scope="session")
def fig1():
    state, prob = jc.prepare(4.0, (3.7 * math.pi, 1.9 * math.pi))
    return state, prob


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULT_LINES

    if RESULT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in RESULT_LINES:
            terminalreporter.write_line(line)
