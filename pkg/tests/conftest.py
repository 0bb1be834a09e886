"""Per-criterion PASS/FAIL/SKIP lines for tests marked ``@pytest.mark.criterion``."""

import pytest

_results: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            number, title = mark.args
            _results.setdefault(number, {"title": title, "outcomes": [], "detail": []})


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    entry = _results[mark.args[0]]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        entry["outcomes"].append("skip" if report.skipped else report.outcome)
        detail = getattr(item, "criterion_detail", None)
        if detail:
            entry["detail"].append(detail)


def _verdict(outcomes):
    if not outcomes:
        return "NOT RUN"
    if "failed" in outcomes:
        return "FAIL"
    if all(o == "skip" for o in outcomes):
        return "SKIP"
    return "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        entry = _results[number]
        line = f"{_verdict(entry['outcomes']):7s} criterion {number}: {entry['title']}"
        if entry["detail"]:
            line += "  [" + "; ".join(entry["detail"]) + "]"
        terminalreporter.write_line(line)
