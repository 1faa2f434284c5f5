import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def interlaced(n, rng, lo=-1.0, hi=1.0):
    """Sorted poles in [lo, hi] and one target strictly inside each gap."""
    lam = np.sort(rng.uniform(lo, hi, n))
    gaps = np.diff(np.append(lam, hi + (hi - lo) / n))
    mu = lam + gaps * rng.uniform(0.1, 0.9, n)
    return lam, mu


def rel_err(got, ref):
    return float(np.max(np.abs(got - ref)) / np.max(np.abs(ref)))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
