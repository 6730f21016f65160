import math

import numpy as np
import pytest

from blowup_lab.grid import RadialField, RadialGrid, make_params
from blowup_lab.solver import SimConfig, gaussian_data, homogeneous_exact, run_to_blowup

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_RESULTS, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k, ok, detail in sorted(lines, key=lambda x: x[0]):
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def record(request):
    """Log one acceptance line; printed in the terminal summary."""

    def _record(k, ok, detail):
        request.config.stash[_RESULTS].append((k, bool(ok), detail))

    return _record


def supercritical_run(num_nodes=2000, amplitude=1.5, beta=0.01, **kw):
    P = make_params(3, 7)
    g = RadialGrid.graded(20.0, num_nodes, 3, 4.0)
    cfg = SimConfig(P, g, gaussian_data(g, amplitude, 1.0), data_width=1.0, beta=beta, **kw)
    return run_to_blowup(cfg)


def bounded_run():
    P = make_params(3, 7)
    g = RadialGrid.graded(20.0, 2000, 3, 4.0)
    cfg = SimConfig(P, g, gaussian_data(g, 1.2, 1.0), data_width=1.0, beta=0.05,
                    t_end=1.0, snapshot_dt=0.01)
    return run_to_blowup(cfg)


def homogeneous_snapshots(grid, p, T, times):
    return [(float(t), RadialField.constant(grid, homogeneous_exact(p, T, t))) for t in times]


@pytest.fixture(scope="session")
def p7():
    return make_params(3, 7)


@pytest.fixture(scope="session")
def p3():
    return make_params(3, 3)


@pytest.fixture(scope="session")
def super_trace():
    """Gaussian data 1.5 exp(-r²), n=3, p=7: blows up at the origin near t = 0.0474."""
    return supercritical_run()


@pytest.fixture(scope="session")
def bounded_trace():
    """Gaussian data 1.2 exp(-r²), n=3, p=7: decays, run to t = 1."""
    return bounded_run()


@pytest.fixture(scope="session")
def decaying_profiles(p7):
    from blowup_lab.profile import find_decaying_profiles

    return find_decaying_profiles(p7)


@pytest.fixture(scope="session")
def smooth_field():
    g = RadialGrid.graded(12.0, 1500, 3, 2.0)
    return RadialField.from_function(g, lambda r: np.exp(-r * r) * (1.0 + 0.5 * r * r))


def pytest_collection_modifyitems(config, items):
    for item in items:
        if "acceptance" in item.nodeid:
            item.add_marker(pytest.mark.slow)


INF = math.inf
