import warnings

import pytest
from hypothesis import settings

from ahlab.errors import ValidityWarning
from ahlab.model import ArrayGeometry, CouplingFamily, PhysicalConstants, make_params

settings.register_profile("ahlab", max_examples=60, deadline=None)
settings.load_profile("ahlab")


def chain(N=400, n_bar=4.0, x1=100.0, L=100.0, potential="delta", width=0.0, packet=None,
          hbar=1.0, c=1.0, omega=1.0):
    """Array of N sites spanning [x1, x1 + L]; the default is the quarter-point reference."""
    geo = ArrayGeometry.spanning(x1, L, N)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        return make_params(PhysicalConstants(hbar, c, omega), geo, CouplingFamily(n_bar),
                           potential, width, packet)


@pytest.fixture
def quarter():
    """n_bar = 4, N = 400 (g = 0.1); at t = 125 exactly 100 sites have been passed."""
    return chain()


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
