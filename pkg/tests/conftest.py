import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_TITLES = {
    1: "standard coverage table",
    2: "targeted coverage table",
    3: "validity of provably valid methods",
    4: "half-width theorem inequalities",
    5: "exact interval oracle equivalence",
    6: "relaxed B-E internal consistency",
    7: "special-function contracts",
    8: "determinism",
}
_results = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    match = _CRITERION.search(report.nodeid.split("::")[-1])
    if not match:
        return
    number = int(match.group(1))
    failed = report.failed or (report.when == "call" and report.skipped)
    _results[number] = _results.get(number, True) and not failed


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        status = "PASS" if _results[number] else "FAIL"
        terminalreporter.write_line(f"criterion {number} ({_TITLES.get(number, '')}): {status}")
