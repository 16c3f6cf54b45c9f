import numpy as np
import pytest

from sirratio.core import EpidemicState, ModelParams, simulate
from sirratio.rng import RngStream, stream_id


def small_path(seed, n=200, i0=5, T=12, a=None, c=None):
    """A short random path on a small population, for oracle checks."""
    gen = np.random.default_rng(seed)
    a = a if a is not None else gen.uniform(0.2, 0.95)
    c = c if c is not None else gen.uniform(0.05, 0.5)
    params = ModelParams(a, c, n)
    return params, simulate(params, EpidemicState.initial(n, i0), T, RngStream(seed, stream_id("small")))


@pytest.fixture
def base_params():
    return ModelParams(0.1, 0.07, 3_000_000)


@pytest.fixture
def epidemic(base_params):
    init = EpidemicState.initial(3_000_000, 50)
    return simulate(base_params, init, 700, RngStream(7, stream_id("epidemic")))


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
