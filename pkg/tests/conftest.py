import numpy as np
import pytest
from hypothesis import strategies as st
from scipy.stats import unitary_group


def haar(n: int, seed: int) -> np.ndarray:
    return unitary_group.rvs(n, random_state=seed)


seeds = st.integers(min_value=0, max_value=2**31 - 2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
