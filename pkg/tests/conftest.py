"""Shared trajectories and the per-criterion acceptance summary."""
from __future__ import annotations

import time
from collections import OrderedDict

import pytest

from ssns.solver import SolverConfig, simulate

# Taylor–Green reference run used by the energy, balance and certificate checks
TG_CONFIG = SolverConfig(n=32, nu=0.1, dt=1e-3, t_end=1.0, sample_every=10, init="taylor_green")
# random divergence-free start, same grid
RANDOM_CONFIG = SolverConfig(n=32, nu=0.1, dt=2e-3, t_end=0.5, sample_every=5, init="random", seed=3)
# strongly viscous decaying run: restricted endpoint norms drop below their thresholds
ENDPOINT_CONFIG = SolverConfig(n=32, nu=1.0, dt=5e-3, t_end=1.5, sample_every=2, init="taylor_green")
# cheap run for structural tests
SMALL_CONFIG = SolverConfig(n=16, nu=0.2, dt=5e-3, t_end=0.2, sample_every=2, init="random", seed=1)


@pytest.fixture(scope="session")
def tg_log():
    start = time.perf_counter()
    log = simulate(TG_CONFIG, keep_snapshots="all")
    log.elapsed = time.perf_counter() - start
    return log


@pytest.fixture(scope="session")
def random_log():
    return simulate(RANDOM_CONFIG, keep_snapshots="all")


@pytest.fixture(scope="session")
def endpoint_log():
    return simulate(ENDPOINT_CONFIG, keep_snapshots="all")


@pytest.fixture(scope="session")
def small_log():
    return simulate(SMALL_CONFIG, keep_snapshots="all")


# -- acceptance summary ----------------------------------------------------------------------------
_CRITERIA: "OrderedDict[int, dict]" = OrderedDict()


def pytest_collection_modifyitems(session, config, items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            num, title = m.args
            _CRITERIA.setdefault(num, {"title": title, "outcomes": []})
            item.user_properties.append(("criterion", num))


def pytest_runtest_logreport(report):
    num = dict(report.user_properties).get("criterion")
    if num is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[num]["outcomes"].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        entry = _CRITERIA[num]
        outcomes = entry["outcomes"]
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {entry['title']:<58} {status}")
