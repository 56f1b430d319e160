import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

coords = st.floats(-10, 10, allow_nan=False, allow_infinity=False, width=64)


@st.composite
def point_sets(draw, min_n=1, max_n=50, max_D=8):
    n = draw(st.integers(min_n, max_n))
    D = draw(st.integers(1, max_D))
    return draw(hnp.arrays(np.float64, (n, D), elements=coords))


def rel_close(a, b, rtol=1e-9, floor=1e-12):
    return abs(a - b) <= rtol * max(abs(a), abs(b), floor)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
