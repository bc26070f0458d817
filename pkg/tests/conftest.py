import numpy as np
import pytest

from splitep.problems import (
    CournotParams,
    OpParams,
    build_cournot,
    build_op,
    build_rotation,
    build_strongly_pseudomonotone,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_psd(rng, n):
    M = rng.normal(size=(n, n))
    return M @ M.T / n


def builtin_instances():
    rng = np.random.default_rng(3)
    return [
        build_cournot(CournotParams.default(2)),
        build_cournot(CournotParams.default(5)),
        build_op(OpParams(Q=random_psd(rng, 3), box_lo=0.0, box_hi=2.0)),
        build_op(OpParams(Q=2 * np.eye(1), box_lo=0.0, box_hi=2.0)),
        build_rotation(),
        build_strongly_pseudomonotone(4, 1.0),
    ]


_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not report.failed:
        return
    number, title = marker.args
    ok = report.passed and _CRITERIA.get(number, (True,))[0]
    _CRITERIA[number] = (ok, title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, title = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")
