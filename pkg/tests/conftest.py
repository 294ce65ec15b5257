"""Collects acceptance-criterion outcomes and prints one PASS/FAIL line per criterion."""

import pytest

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if rep.when != "call" and rep.passed:
        return
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    if rep.skipped:
        status = "SKIP"
    else:
        status = "PASS" if rep.passed else "FAIL"
    if rep.failed and not detail:
        detail = rep.longreprtext.strip().splitlines()[-1] if rep.longreprtext else ""
    prev = _ACCEPTANCE.get(number)
    if prev is None or prev[1] == "PASS":
        _ACCEPTANCE[number] = (title, status, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status, detail = _ACCEPTANCE[number]
        line = f"{status} criterion {number:2d}: {title}"
        if detail:
            line += f" [{detail}]"
        terminalreporter.write_line(line)
