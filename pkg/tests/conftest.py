import re

import pytest

from calculist.session import Session

_acceptance: dict[int, list[tuple[str, str]]] = {}


@pytest.fixture
def session(tmp_path):
    return Session(base_dir=str(tmp_path))


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    m = re.match(r"test_criterion_(\d+)", name)
    if m:
        _acceptance.setdefault(int(m.group(1)), []).append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion; failing checks are listed under it."""
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        checks = _acceptance[n]
        failed = [name for name, outcome in checks if outcome != "passed"]
        verdict = "FAIL" if failed else "PASS"
        terminalreporter.write_line(f"{verdict}  criterion {n} ({len(checks)} checks)")
        for name in failed:
            terminalreporter.write_line(f"        failed: {name}")
