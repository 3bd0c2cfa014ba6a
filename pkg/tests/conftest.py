import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from csu import fixtures  # noqa: E402

_criteria: dict[str, tuple[int, str]] = {}
_outcomes: dict[int, list[bool]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            title = mark.kwargs.get("title", item.name)
            _criteria[item.nodeid] = (mark.args[0], title)


def pytest_runtest_logreport(report):
    if report.nodeid not in _criteria:
        return
    if report.when == "call" or report.failed or report.skipped:
        n, _ = _criteria[report.nodeid]
        _outcomes.setdefault(n, []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    titles = {}
    for n, title in _criteria.values():
        titles.setdefault(n, title)
    terminalreporter.section("acceptance criteria")
    for n in sorted(titles):
        results = _outcomes.get(n)
        if not results:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {n:>2}: {status}  {titles[n]}")


@pytest.fixture(scope="session")
def worked():
    return fixtures.load("worked")


@pytest.fixture(scope="session")
def tree_grammar():
    return fixtures.load("tree")


@pytest.fixture(scope="session")
def ambiguous():
    return fixtures.load("ambiguous")
