import pytest

ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call" or not item.name.startswith("test_criterion"):
        return
    label = item.function.__doc__ or item.name
    label = label.strip().splitlines()[0]
    if hasattr(report, "wasxfail"):
        status = "XFAIL" if report.skipped else "XPASS"
    else:
        status = "PASS" if report.passed else "FAIL"
    ACCEPTANCE[item.name] = (status, report.duration, label)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    tw = terminalreporter
    tw.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        status, duration, label = ACCEPTANCE[name]
        tw.write_line(f"{status:5s} {label}  [{duration:.1f}s]")
