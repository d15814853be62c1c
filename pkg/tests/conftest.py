import time

import pytest

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        detail = ""
        if rep.failed and call.excinfo is not None:
            detail = str(call.excinfo.value).strip().splitlines()[0][:160]
        _CRITERIA.append((mark.args[0], status, rep.duration, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for label, status, dur, detail in _CRITERIA:
        line = f"{status}  {label}  ({dur:.1f} s)"
        if detail:
            line += f"  -- {detail}"
        tr.write_line(line)
    n_pass = sum(1 for c in _CRITERIA if c[1] == "PASS")
    tr.write_line(f"{n_pass}/{len(_CRITERIA)} criteria passed")


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False


@pytest.fixture
def stopwatch():
    return Stopwatch
