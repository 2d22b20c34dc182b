import pytest

from jethelm.expr import ProbeSettings, set_settings


@pytest.fixture(autouse=True)
def default_probe_settings():
    old = set_settings(ProbeSettings())
    yield
    set_settings(old)


_CRASHED = {}


def pytest_runtest_logreport(report):
    # a criterion that raised before reporting still gets a FAIL line
    name = report.nodeid.rsplit("::", 1)[-1]
    if report.failed and name.startswith("test_criterion_"):
        number = int(name.split("_")[2])
        _CRASHED[number] = f"[FAIL] criterion {number}: {name} raised {report.longrepr.reprcrash.message if hasattr(report.longrepr, 'reprcrash') else 'an error'}"


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = dict(getattr(mod, "RESULTS", None) or {})
    for k, line in _CRASHED.items():
        if not results.get(k, "").startswith("[FAIL]"):
            results[k] = line
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
