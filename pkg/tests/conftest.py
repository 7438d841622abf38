import pytest

_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None and (report.when == "call" or report.failed):
        results = item.config.stash[_CRITERIA]
        number = marker.args[0]
        if report.failed or number not in results:
            results[number] = ("PASS" if report.passed else "FAIL", item.name)
    return report


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash[_CRITERIA]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, name = results[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {name}")
