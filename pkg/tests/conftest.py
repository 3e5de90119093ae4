import time

import numpy as np
import pytest

from tlcbounds.function_class import FunctionTable, LossTable

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion with a pass/fail summary line")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_call(item):
    start = time.perf_counter()
    yield
    item.user_properties.append(("elapsed", time.perf_counter() - start))


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    mark = dict(report.user_properties).get("criterion")
    if mark is None:
        return
    number, text = mark
    elapsed = dict(report.user_properties).get("elapsed", 0.0)
    _CRITERIA.append((number, "PASS" if report.passed else "FAIL", text, elapsed))


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", (m.args[0], m.args[1])))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, text, elapsed in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {text}  ({elapsed:.2f} s)")


@pytest.fixture
def two_function_class():
    return FunctionTable.from_rows([[0, 1, 0, 1], [1, 0, 1, 0]])


@pytest.fixture
def two_candidate_losses():
    # f1 = (1,0,0,0), f2 = (0,0,1,1); f1 minimises the full-sample loss
    return LossTable.from_rows([[1, 0, 0, 0], [0, 0, 1, 1]])


def random_class(rng, n, M, scale=3.0):
    return FunctionTable.from_rows(np.round(rng.uniform(-scale, scale, size=(M, n)), 3))
