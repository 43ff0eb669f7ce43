import math

import numpy as np
import pytest

from casimir_wn.model import CavityParams
from casimir_wn.pipeline import run_exact

BASE = CavityParams(L=1.0, q0=1 / 12, phi=0.0, omega_d=2 * math.pi)
BASE_TIMES = np.linspace(0.0, 20.0, 2001)

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def base_run():
    return run_exact(BASE, BASE_TIMES, rtol=1e-10, atol=1e-12)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
