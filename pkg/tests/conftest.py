import itertools

import pytest

from pdmcavity.model import Dressed, GROUND, SystemParams

F_GRID = (0.01, 0.02, 0.05)
ALPHA_GRID = (0.0, 0.25, 0.5, 1.0)
DELTA_GRID = (-0.5, -0.1, 0.0, 0.1, 0.5)

GRID = [SystemParams.from_f(f, alpha=a, delta=d)
        for f, a, d in itertools.product(F_GRID, ALPHA_GRID, DELTA_GRID)]
EXCITED = [Dressed(k, b) for k in range(4) for b in "+-"]
LABELS = [GROUND] + EXCITED


def grid_id(p):
    return f"f{p.f:g}-a{p.alpha:g}-d{p.delta:g}"


@pytest.fixture
def resonant():
    """f = 0.05, alpha = 1 at resonance with omega_c = 1."""
    return SystemParams.from_f(0.05, alpha=1.0)


ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
