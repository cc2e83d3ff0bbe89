"""Deterministic synthetic scenarios used by the tests, CLI examples and the
golden files under ``fixtures/``.

Every builder is a pure function of its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EventStream, PupilTrajectory
from .perturb import Blink, NoiseLowAmp, PerturbationSpec, PixelShift, Tremor, perturb

SENSOR = (640, 480)
SLOT_US = 1000


def smooth_truth(n: int = 256, period: float = 128.0, amplitude: float = 20.0, sample_period_us: int = SLOT_US) -> PupilTrajectory:
    """Slow elliptical pupil motion around the sensor centre."""
    i = np.arange(n)
    phase = 2.0 * np.pi * i / period
    x = 320.0 + amplitude * np.sin(phase)
    y = 240.0 + 0.5 * amplitude * np.cos(phase)
    return PupilTrajectory.from_xy(x, y, sample_period=sample_period_us, t0=0)


BLINK = Blink(start=100, duration=3, magnitude=30.0)


def blink_fixture(n: int = 256):
    """``(truth, raw)``: smooth motion with one 3-sample, 30 px vertical blink."""
    truth = smooth_truth(n)
    return truth, perturb(truth, PerturbationSpec([BLINK], seed=0))


TREMOR_SPEC = PerturbationSpec([Tremor(frequency=100, amplitude=2.0), NoiseLowAmp(0.2)], seed=7)
OFFSET_SPEC = PerturbationSpec([PixelShift(start=0, offset=(3.0, 3.0)), NoiseLowAmp(0.2)], seed=11)


def decoupling_pair(n: int = 512):
    """``(truth, tremor_dominant, offset_dominant)``.

    The tremor prediction stays closer to the truth in squared error while
    its velocity profile is far less truth-like than the shifted one.
    """
    truth = smooth_truth(n)
    return truth, perturb(truth, TREMOR_SPEC), perturb(truth, OFFSET_SPEC)


def _stream(rows, width=SENSOR[0], height=SENSOR[1]) -> EventStream:
    arr = np.asarray(rows, dtype=np.int64).reshape(-1, 4)
    order = np.argsort(arr[:, 0], kind="stable")
    arr = arr[order]
    return EventStream(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], width, height)


@dataclass(frozen=True)
class SweepFixture:
    filtered: PupilTrajectory
    stream: EventStream
    gated: tuple
    direction: tuple


def sweep_fixture(n: int = 12, gated_index: int = 6, n_sweep: int = 200, background: int = 10, seed: int = 3) -> SweepFixture:
    """A stationary prediction with sparse background events everywhere and a
    cloud of ``n_sweep`` events crossing its ROI during one prediction slot.

    The cloud travels from (47, 46) to (53, 54): flow (6, 8), unit (0.6, 0.8).
    """
    rng = np.random.Generator(np.random.Philox(seed))
    centre = np.array([50.0, 50.0])
    filtered = PupilTrajectory(np.tile(centre, (n, 1)), sample_period=SLOT_US, t0=0)
    rows = []
    for j in range(n):
        t0 = j * SLOT_US
        if j == gated_index:
            s = np.linspace(0.0, 1.0, n_sweep)
            ts = t0 + np.floor(s * (SLOT_US - 1)).astype(np.int64)
            xs = np.rint(47 + 6 * s + rng.uniform(-0.4, 0.4, n_sweep))
            ys = np.rint(46 + 8 * s + rng.uniform(-0.4, 0.4, n_sweep))
            xs[0], ys[0], xs[-1], ys[-1] = 47, 46, 53, 54
            rows += [(t, x, y, 1) for t, x, y in zip(ts, xs, ys)]
        else:
            ts = np.sort(rng.integers(t0, t0 + SLOT_US, background))
            xy = rng.integers(44, 57, (background, 2))
            rows += [(t, x, y, -1) for t, (x, y) in zip(ts, xy)]
    # the closing event pins the stream span to exactly n slots
    rows.append((n * SLOT_US, 0, 0, 1))
    rows.insert(0, (0, 0, 0, 1))
    return SweepFixture(filtered, _stream(rows), (gated_index,), (0.6, 0.8))


def sparse_fixture(n: int = 12, seed: int = 3) -> SweepFixture:
    """Background events only: no ROI ever passes the count gate."""
    f = sweep_fixture(n, gated_index=-1, seed=seed)
    return SweepFixture(f.filtered, f.stream, (), (0.0, 0.0))


@dataclass(frozen=True)
class CompositeFixture:
    truth: PupilTrajectory
    raw: PupilTrajectory
    stream: EventStream


def composite_fixture(n: int = 256, lag: int = 2, seed: int = 5) -> CompositeFixture:
    """Lagging predictions with a blink, plus events emitted by the true pupil.

    The predictions trail the truth by ``lag`` samples, the usual failure of
    causal trackers, and carry one blink. Events follow the true pupil centre
    through each prediction slot with a count proportional to its speed, so
    only clearly moving slots pass the flow count gate.
    """
    truth = smooth_truth(n, amplitude=60.0)
    lagged = np.vstack([np.repeat(truth.xy[:1], lag, axis=0), truth.xy[:-lag]])
    raw = perturb(truth.with_xy(lagged), PerturbationSpec([Blink(start=60, duration=3, magnitude=30.0)], seed=seed))

    rng = np.random.Generator(np.random.Philox(seed))
    i = np.arange(n + 1)
    phase = 2.0 * np.pi * i / 128.0
    path = np.column_stack([320.0 + 60.0 * np.sin(phase), 240.0 + 30.0 * np.cos(phase)])
    rows = [(0, 2, 2, 1)]
    for j in range(n):
        start, end = path[j], path[j + 1]
        speed = float(np.hypot(*(end - start)))
        k = max(2, int(round(60.0 * speed)))
        s = np.linspace(0.0, 1.0, k)
        ts = j * SLOT_US + np.floor(s * (SLOT_US - 1)).astype(np.int64)
        pts = start + s[:, None] * (end - start) + rng.uniform(-0.4, 0.4, (k, 2))
        pts[0], pts[-1] = start, end
        pts = np.rint(pts)
        rows += [(t, x, y, 1 if m % 2 else -1) for m, (t, (x, y)) in enumerate(zip(ts, pts))]
        # sensor noise far from the eye
        noise = rng.integers(0, 40, (3, 2))
        rows += [(int(j * SLOT_US + 10 * q), int(a), int(b), -1) for q, (a, b) in enumerate(noise)]
    rows.append((n * SLOT_US, 2, 2, 1))
    return CompositeFixture(truth, raw, _stream(rows))


EXAMPLE_CONFIG = """\
# default parameters; command-line flags override any value here
w_base=5
w_min=5
w_max=20
percentile=75
method=covariance
tau=8
c=5
gamma=2
lambda=0.75
thresholds=10,5,1
"""


def write_golden(directory) -> list:
    """Write every golden fixture file into ``directory``; returns the names."""
    from pathlib import Path

    from .fileio import write_events, write_trajectory

    d = Path(directory)
    written = []

    def traj(name, t):
        write_trajectory(t, d / name)
        written.append(name)

    def events(name, s):
        write_events(s, d / name)
        written.append(name)

    truth, raw = blink_fixture()
    traj("blink_truth.csv", truth)
    traj("blink_raw.csv", raw)

    t, tremor, offset = decoupling_pair()
    traj("decoupling_truth.csv", t)
    traj("decoupling_tremor.csv", tremor)
    traj("decoupling_offset.csv", offset)

    sw = sweep_fixture()
    traj("sweep_filtered.csv", sw.filtered)
    events("sweep_events.csv", sw.stream)
    events("sparse_events.csv", sparse_fixture().stream)

    comp = composite_fixture()
    traj("composite_truth.csv", comp.truth)
    traj("composite_raw.csv", comp.raw)
    events("composite_events.csv", comp.stream)

    traj("constant.csv", PupilTrajectory(np.tile([100.0, 80.0], (64, 1)), sample_period=SLOT_US, t0=0))
    traj("short_truth.csv", PupilTrajectory(truth.xy[:100], sample_period=SLOT_US, t0=0))

    (d / "events_unsorted.csv").write_text("t,x,y,p\n0,5,5,1\n20,6,5,-1\n10,7,5,1\n30,8,5,1\n", encoding="utf-8")
    written.append("events_unsorted.csv")
    (d / "pipeline.cfg").write_text(EXAMPLE_CONFIG, encoding="utf-8")
    written.append("pipeline.cfg")
    return written
