import pytest

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _outcomes.setdefault(number, {"title": title, "failed": [], "passed": 0, "skipped": 0})


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when not in ("setup", "call"):
        return
    entry = _outcomes[mark.args[0]]
    if call.excinfo is not None:
        if call.excinfo.errisinstance(pytest.skip.Exception):
            entry["skipped"] += 1
        else:
            entry["failed"].append(item.name)
    elif call.when == "call":
        entry["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        entry = _outcomes[number]
        ran = entry["passed"] + len(entry["failed"])
        if ran == 0:
            verdict = "NOT RUN"
        elif entry["failed"]:
            verdict = "FAIL"
        else:
            verdict = "PASS"
        detail = f"{entry['passed']}/{ran} checks"
        if entry["failed"]:
            detail += "; failing: " + ", ".join(entry["failed"])
        terminalreporter.write_line(f"criterion {number}: {verdict}  {entry['title']}  ({detail})")
