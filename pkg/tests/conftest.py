import numpy as np
import pytest

ACCEPTANCE_RESULTS = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for name, value in report.user_properties:
        if name == "criterion":
            ACCEPTANCE_RESULTS[value] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {key:2d}: {ACCEPTANCE_RESULTS[key]}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
