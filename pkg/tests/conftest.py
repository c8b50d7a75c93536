import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py::" not in report.nodeid:
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _CRITERIA.append((props["criterion"], props.get("title", ""), report.passed,
                          props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_CRITERIA):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number:2d}: {title} ({detail})")
