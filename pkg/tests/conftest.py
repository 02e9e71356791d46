import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_acceptance: dict[str, list[str]] = {}
_labels: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): end-to-end acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            _labels[item.nodeid] = mark.args[0]


def pytest_runtest_logreport(report):
    label = _labels.get(report.nodeid)
    if label is None:
        return
    outcomes = _acceptance.setdefault(label, [])
    if report.when == "call" or report.outcome != "passed":
        outcomes.append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcomes in _acceptance.items():
        ok = bool(outcomes) and all(o == "passed" for o in outcomes)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")
