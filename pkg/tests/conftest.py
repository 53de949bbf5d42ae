import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_results: dict[str, list[str]] = {}


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("acceptance")
    if marker:
        item.user_properties.append(("criterion", str(marker.args[0])))


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        for key, value in report.user_properties:
            if key == "criterion":
                _results.setdefault(value, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_results, key=int):
        outcomes = _results[name]
        verdict = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        passed = outcomes.count("passed")
        terminalreporter.write_line(f"criterion {name}: {verdict} ({passed}/{len(outcomes)} checks)")
