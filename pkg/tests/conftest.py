"""Shared fixtures and the pass/fail summary for the acceptance criteria."""

from __future__ import annotations

import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def report(request):
    """Attach a one-line detail string to the running acceptance criterion."""
    marker = request.node.get_closest_marker("criterion")
    num = marker.args[0] if marker else None

    def _report(detail: str):
        if num is not None:
            _CRITERIA.setdefault(num, {})["detail"] = detail

    return _report


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not rep.failed:
        return
    num, title = marker.args[0], marker.args[1]
    entry = _CRITERIA.setdefault(num, {})
    entry["title"] = title
    if rep.when == "call" or rep.failed:
        entry["passed"] = entry.get("passed", True) and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        e = _CRITERIA[num]
        status = "PASS" if e.get("passed") else "FAIL"
        line = f"criterion {num:2d} [{status}] {e.get('title', '')}"
        if e.get("detail"):
            line += f" | {e['detail']}"
        tr.write_line(line)
