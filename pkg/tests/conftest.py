import numpy as np
import pytest

from nytrolab.kernel import KernelGram


def random_psd(n, rank=None, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    rank = n if rank is None else rank
    B = rng.standard_normal((n, rank))
    K = scale * B @ B.T / max(rank, 1)
    return (K + K.T) / 2.0


@pytest.fixture
def psd():
    return random_psd


@pytest.fixture
def gram():
    def make(n, rank=None, seed=0, diag_max_one=True):
        K = random_psd(n, rank, seed)
        if diag_max_one:
            K = K / np.max(np.diag(K))
        return KernelGram(K)

    return make


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
