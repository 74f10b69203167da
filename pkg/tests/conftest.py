import numpy as np
import pytest
from hypothesis import strategies as st

from mmauction import Instance

ACCEPTANCE_LINES: list[str] = []


def random_instance(rng: np.random.Generator, m: int, n: int, density: float = 1.0, high: int = 100) -> Instance:
    """Random integer instance; sparse masks are redrawn until every AP can be served."""
    while True:
        b = rng.integers(0, high + 1, size=(m, n))
        if density >= 1.0:
            return Instance(b)
        mask = rng.random((m, n)) < density
        if not mask.any(axis=0).all() or not mask.any(axis=1).all():
            continue
        inst = Instance(b, mask)
        if inst.is_coverable():
            return inst


@st.composite
def instances(draw, max_m=4, max_n=9, high=100):
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(m, max_n))
    vals = draw(st.lists(st.integers(0, high), min_size=m * n, max_size=m * n))
    mask = draw(st.lists(st.booleans(), min_size=m * n, max_size=m * n))
    b = np.array(vals).reshape(m, n)
    adj = np.array(mask).reshape(m, n)
    # every client reaches AP j mod m, giving each AP a distinct client
    for j in range(n):
        adj[j % m, j] = True
    return Instance(b, adj)


@pytest.fixture
def running_example():
    return Instance.from_rows([[10, 3, 8], [2, 9, 7]])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
