import warnings

import numpy as np
import pytest

from seclist.channel import RedundantInputWarning, make_awgn_bpsk, make_bsc, make_channel


@pytest.fixture(scope="session")
def bsc01():
    return make_bsc(0.1)


@pytest.fixture(scope="session")
def noiseless():
    return make_bsc(0.0)


@pytest.fixture(scope="session")
def useless():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RedundantInputWarning)
        return make_channel([[0.3, 0.7], [0.3, 0.7]], check_redundancy=False)


@pytest.fixture(scope="session")
def awgn1():
    return make_awgn_bpsk(1.0)


def random_channel(rng, d, k):
    return make_channel(rng.dirichlet(np.ones(k), size=d), check_redundancy=False)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
