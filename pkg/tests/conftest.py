import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE = {}


def record(criterion, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE[criterion] = line
    print(line)


@pytest.fixture
def report():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])


def random_cloud(rng, n_max, d=None, grid=None, n_min=2):
    """Random coordinates; ``grid`` snaps to a lattice so duplicates and ties occur."""
    n = int(rng.integers(n_min, n_max + 1))
    d = d or int(rng.integers(1, 4))
    coords = rng.random((n, d)) * 10
    if grid is None:
        grid = rng.random() < 0.4
    if grid:
        coords = np.round(coords * 2) / 2
    return coords
