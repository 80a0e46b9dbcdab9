import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from poisgof import kernels  # noqa: E402
from poisgof.cli import load_dataset  # noqa: E402


@pytest.fixture(scope="session")
def sparrow():
    return load_dataset("sparrow")


@pytest.fixture(scope="session")
def horsekicks():
    return load_dataset("horsekicks")


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request):
    return kernels.backends()[request.param]


@pytest.fixture
def small_samples():
    """1000 random samples of size 1..10 with values in 0..8 (all-zero rows excluded)."""
    rng = np.random.default_rng(20240611)
    out = []
    while len(out) < 1000:
        n = int(rng.integers(1, 11))
        top = int(rng.integers(1, 9))
        v = rng.integers(0, top + 1, size=n)
        if v.sum() > 0:
            out.append([int(x) for x in v])
    return out


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
