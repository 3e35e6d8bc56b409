import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def simplex(min_size=2, max_size=12, lo=1e-4):
    """Hypothesis strategy: strictly positive vectors normalized onto the simplex."""
    return st.integers(min_size, max_size).flatmap(
        lambda n: arrays(np.float64, n, elements=st.floats(lo, 1.0))
    ).map(lambda v: v / v.sum())


def simplex_pair(min_size=2, max_size=12, lo=1e-4):
    return st.integers(min_size, max_size).flatmap(
        lambda n: st.tuples(
            arrays(np.float64, n, elements=st.floats(lo, 1.0)),
            arrays(np.float64, n, elements=st.floats(lo, 1.0)),
        )
    ).map(lambda t: (t[0] / t[0].sum(), t[1] / t[1].sum()))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
