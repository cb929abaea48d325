import os

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


EXAMPLE1_MASKS = ({0, 2}, {0, 1, 2, 3}, {0, 2}, {0, 1, 2, 3})


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for i in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[i])
