import numpy as np
import pytest

from lmthresh import GpdParams, RandomStream, gpd_quantile

# filled by the acceptance module, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def gpd_draw(n, sigma=1.0, xi=0.0, seed=0, key=()):
    u = RandomStream(seed, key).generator().random(n)
    return gpd_quantile(u, GpdParams(sigma, xi))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
