import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from pupilpost import PupilTrajectory

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or rep.failed or rep.skipped:
        prev = _criteria.get(number, (title, "PASS"))[1]
        status = "FAIL" if rep.failed else ("SKIP" if rep.skipped else "PASS")
        if prev == "FAIL":
            status = "FAIL"
        _criteria[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}")


@contextmanager
def within(seconds):
    """Fail when the block takes longer than ``seconds`` of wall time."""
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.2f} s, budget {seconds} s"


def random_walk(rng, n, step=1.0, start=(320.0, 240.0)):
    steps = rng.normal(0.0, step, size=(n, 2))
    return PupilTrajectory(np.cumsum(steps, axis=0) + np.asarray(start))


@st.composite
def trajectories(draw, min_len=5, max_len=80, scale=50.0):
    n = draw(st.integers(min_len, max_len))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    kind = draw(st.sampled_from(["walk", "uniform", "steps"]))
    if kind == "walk":
        xy = np.cumsum(rng.normal(0, 1, (n, 2)), axis=0) * scale / 10
    elif kind == "uniform":
        xy = rng.uniform(-scale, scale, (n, 2))
    else:
        xy = rng.integers(-3, 4, (n, 2)).astype(float)
    return PupilTrajectory(xy)
