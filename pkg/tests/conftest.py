from __future__ import annotations

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    crit = item.get_closest_marker("criterion")
    if crit is None:
        return
    key = str(crit.args[0])
    title = crit.args[1] if len(crit.args) > 1 else item.name
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        # a criterion spread over several tests passes only if all of them do
        prev = _ACCEPTANCE.get(key, (title, "PASS"))[1]
        status = "PASS" if rep.passed and prev == "PASS" else "FAIL"
        _ACCEPTANCE[key] = (title, status)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=int):
        title, status = _ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:>2}: {status}  {title}")
