import os

import pytest

from slitkit.cells import ModuliIndex, load_or_enumerate
from slitkit.homology import assemble_cochain_complex


def pytest_configure(config):
    # one cell cache per test session unless the caller pinned one
    if "SLITKIT_CACHE" not in os.environ:
        root = config.rootpath / ".pytest-slitkit-cache"
        os.environ["SLITKIT_CACHE"] = str(root)


@pytest.fixture(scope="session")
def cells_of():
    memo = {}

    def get(g, n, m):
        key = (g, n, m)
        if key not in memo:
            memo[key] = load_or_enumerate(ModuliIndex(g, n, m))
        return memo[key]

    return get


@pytest.fixture(scope="session")
def complex_of(cells_of):
    memo = {}

    def get(g, n, m):
        key = (g, n, m)
        if key not in memo:
            memo[key] = assemble_cochain_complex(cells_of(g, n, m))
        return memo[key]

    return get


# -- acceptance report --------------------------------------------------------------------

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _CRITERIA.setdefault(mark.args[0], (mark.args[1], "NOT RUN"))


def pytest_runtest_logreport(report):
    item_marks = dict(getattr(report, "user_properties", []))
    if "criterion" not in item_marks:
        return
    num, title = item_marks["criterion"]
    status = _CRITERIA.get(num, (title, "NOT RUN"))[1]
    if report.failed:
        status = "FAIL"
    elif report.skipped and status == "NOT RUN":
        status = "SKIP"
    elif report.when == "call" and report.passed and status != "FAIL":
        status = "PASS"
    _CRITERIA[num] = (title, status)


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    mark = item.get_closest_marker("criterion")
    if mark:
        item.user_properties.append(("criterion", (mark.args[0], mark.args[1])))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, status = _CRITERIA[num]
        terminalreporter.write_line(f"{status:<5} criterion {num}: {title}")
