import numpy as np
import pytest

from learnedspatial.geo import Rect
from learnedspatial.workload import SyntheticSpec, gen_synthetic


def synthetic(n, clusters=5, spread=1.0, seed=0, domain=Rect(-60.0, -170.0, 70.0, 170.0)):
    return gen_synthetic(SyntheticSpec(n=n, clusters=clusters, spread=spread, domain=domain, seed=seed))


@pytest.fixture(scope="session")
def skewed_20k():
    return synthetic(20_000, clusters=5, spread=2.0, seed=11)


@pytest.fixture(scope="session")
def uniform_20k():
    return synthetic(20_000, clusters=0, seed=12)


@pytest.fixture(scope="session")
def dup_heavy():
    """Heavy duplication: points snapped to a 0.01-degree lattice in one cluster."""
    pts = synthetic(5_000, clusters=1, spread=0.05, seed=13)
    return np.round(pts, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Record one status line for the end-of-run acceptance summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def emit(label: str, status: str, detail: str) -> None:
        lines.append(f"{status:<4} {label}: {detail}")

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
