import numpy as np
import pytest

from forwardsignal.synthetic import random_walk_bars


@pytest.fixture(scope="session")
def walk_bars():
    return random_walk_bars(2000, seed=11)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_series(rng, n, start=1.10, vol=5e-4):
    return start * np.exp(np.cumsum(vol * rng.standard_normal(n)))


_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion number and summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when not in ("setup", "call"):
        return
    n, text = mark.args
    if report.failed:
        _criteria[n] = ("FAIL", text)
    elif report.when == "call":
        _criteria.setdefault(n, ("PASS", text))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        status, text = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {text}")
