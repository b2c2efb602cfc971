import re

import pytest

_ACCEPTANCE = []
_OUTCOMES = {}  # criterion number -> outcome of tests that never recorded a line


def pytest_addoption(parser):
    parser.addoption(
        "--full",
        action="store_true",
        default=False,
        help="also run full-scale checks (hours of compute, several GB of memory)",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--full"):
        return
    skip = pytest.mark.skip(reason="full-scale check, enable with --full")
    for item in items:
        if "large_scale" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def acceptance():
    """Record one pass/fail line for the end-of-session acceptance summary."""

    def record(number, title, passed, detail=""):
        _ACCEPTANCE.append((number, title, bool(passed), detail))
        return passed

    return record


def pytest_runtest_logreport(report):
    m = re.search(r"test_criterion_(\d+)_(\w+)", report.nodeid)
    if m and (report.skipped or report.failed):
        reason = report.longrepr[2] if report.skipped and isinstance(report.longrepr, tuple) else "error"
        _OUTCOMES.setdefault(int(m.group(1)), ("SKIP" if report.skipped else "FAIL", m.group(2), reason))


def pytest_terminal_summary(terminalreporter):
    recorded = {r[0] for r in _ACCEPTANCE}
    rows = [(n, "PASS" if ok else "FAIL", title, detail) for n, title, ok, detail in _ACCEPTANCE]
    rows += [(n, status, name, reason) for n, (status, name, reason) in _OUTCOMES.items() if n not in recorded]
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, title, detail in sorted(rows, key=lambda r: r[0]):
        line = f"criterion {number:>2} {status}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
