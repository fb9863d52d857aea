from pathlib import Path

import pytest

from lqe import fixture_path
from lqe.trace_model import LinkTrace, TraceSet

_criteria: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion this test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        if rep.when == "call" and hasattr(rep, "wasxfail"):
            status = "XFAIL"
        _criteria.append((str(number), title, status))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status in sorted(_criteria, key=lambda c: (int(c[0]), c[1])):
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}")


@pytest.fixture
def fixture_dir() -> Path:
    return Path(str(fixture_path()))


def make_trace(rssi, src=1, dst=2, noise=-10):
    return LinkTrace.from_readings(src, dst, noise, list(rssi))


@pytest.fixture
def tiny_set():
    n = 300
    return TraceSet(
        (
            make_trace([40] * n, 1, 2),
            make_trace([None] * n, 2, 1),
            make_trace([30 if i % 2 else None for i in range(n)], 1, 2, 0),
        ),
        n,
    )
