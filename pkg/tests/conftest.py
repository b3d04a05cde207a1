import random
import sys

import pytest
from hypothesis import settings

from risingsun.fixtures import paper_counterexample, riesz_1d_step

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def counterexample():
    return paper_counterexample()


@pytest.fixture
def step_1d():
    return riesz_1d_step()


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)
