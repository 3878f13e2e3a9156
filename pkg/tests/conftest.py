import numpy as np
import pytest
from hypothesis import settings, strategies as st

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

PRIMES = st.sampled_from([3, 5, 7, 11, 13])

_ACCEPTANCE_LINES = []


def record_acceptance(line):
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def matrices(draw, p=None, rows=None, cols=None, max_dim=5):
    p = draw(PRIMES) if p is None else p
    r = draw(st.integers(1, max_dim)) if rows is None else rows
    c = draw(st.integers(1, max_dim)) if cols is None else cols
    vals = draw(st.lists(st.integers(0, p - 1), min_size=r * c, max_size=r * c))
    return np.array(vals, dtype=np.int64).reshape(r, c), p


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
