"""Shared domain types, finite-difference velocity and soft histogramming."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateEdgesError,
    EmptyInputError,
    InvalidParamsError,
    NonFiniteError,
    SortError,
    TooShortError,
    ValidationError,
)

DEFAULT_BINS = 32
DEFAULT_EPS_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class PupilTrajectory:
    """Uniformly sampled 2-D pupil-centre positions in sensor pixels.

    ``sample_period`` is the time between samples in the units of the source
    timestamps (microseconds when read from a timestamped file, 1.0 for plain
    sample units). ``t0`` is the first timestamp, or ``None`` when the source
    had no time column.
    """

    xy: np.ndarray
    sample_period: float = 1.0
    t0: Optional[float] = None

    def __post_init__(self):
        xy = np.array(self.xy, dtype=np.float64)
        if xy.ndim != 2 or xy.shape[1] != 2:
            raise ValidationError(f"expected an (n, 2) array of samples, got shape {xy.shape}")
        if not np.all(np.isfinite(xy)):
            bad = int(np.flatnonzero(~np.isfinite(xy).all(axis=1))[0])
            raise NonFiniteError(f"sample {bad} is not finite: {xy[bad].tolist()}")
        if not (np.isfinite(self.sample_period) and self.sample_period > 0):
            raise ValidationError(f"sample_period must be positive, got {self.sample_period}")
        xy.flags.writeable = False
        object.__setattr__(self, "xy", xy)
        object.__setattr__(self, "sample_period", float(self.sample_period))

    @classmethod
    def from_xy(cls, x, y, sample_period: float = 1.0, t0: Optional[float] = None) -> "PupilTrajectory":
        return cls(np.column_stack([np.asarray(x, float), np.asarray(y, float)]), sample_period, t0)

    def __len__(self) -> int:
        return self.xy.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.xy[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.xy[:, 1]

    def timestamps(self) -> Optional[np.ndarray]:
        if self.t0 is None:
            return None
        return self.t0 + np.arange(len(self)) * self.sample_period

    def with_xy(self, xy) -> "PupilTrajectory":
        """Same timing, new positions."""
        return PupilTrajectory(xy, self.sample_period, self.t0)

    def scaled(self, alpha: float) -> "PupilTrajectory":
        return self.with_xy(self.xy * alpha)

    def translated(self, dx: float, dy: float) -> "PupilTrajectory":
        return self.with_xy(self.xy + np.array([dx, dy]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PupilTrajectory):
            return NotImplemented
        return (
            self.sample_period == other.sample_period
            and self.t0 == other.t0
            and np.array_equal(self.xy, other.xy)
        )


class Event(NamedTuple):
    t: int
    x: int
    y: int
    p: int


@dataclass(frozen=True, eq=False)
class EventStream:
    """Time-ordered camera events held column-wise.

    ``t`` is in microseconds, ``x``/``y`` in integer pixels and ``p`` in
    {-1, +1}. Sensor bounds are optional; when given, coordinates are checked
    against them.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    sensor_width: Optional[int] = None
    sensor_height: Optional[int] = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.int64)
        x = np.asarray(self.x, dtype=np.int64)
        y = np.asarray(self.y, dtype=np.int64)
        p = np.asarray(self.p, dtype=np.int64)
        if not (t.ndim == x.ndim == y.ndim == p.ndim == 1) or not (len(t) == len(x) == len(y) == len(p)):
            raise ValidationError("event columns must be 1-D and of equal length")
        if np.any(t < 0):
            raise ValidationError("event timestamps must be non-negative")
        if not np.all(np.isin(p, (-1, 1))):
            raise ValidationError("event polarity must be -1 or +1")
        if len(t) > 1:
            bad = np.flatnonzero(np.diff(t) < 0)
            if bad.size:
                # the offending event is bad + 1; file lines are 1-based after a header
                raise SortError(int(bad[0]) + 3, "event timestamps out of order")
        for name, vals, bound in (("x", x, self.sensor_width), ("y", y, self.sensor_height)):
            if bound is not None and vals.size and (vals.min() < 0 or vals.max() >= bound):
                raise ValidationError(f"event {name} outside sensor bounds [0, {bound})")
        for name, arr in (("t", t), ("x", x), ("y", y), ("p", p)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_events(cls, events: Sequence[Event], sensor_width=None, sensor_height=None) -> "EventStream":
        if len(events) == 0:
            return cls.empty(sensor_width, sensor_height)
        arr = np.asarray([tuple(e) for e in events], dtype=np.int64)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], sensor_width, sensor_height)

    @classmethod
    def empty(cls, sensor_width=None, sensor_height=None) -> "EventStream":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z, z, z, sensor_width, sensor_height)

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i) -> Event:
        return Event(int(self.t[i]), int(self.x[i]), int(self.y[i]), int(self.p[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def translated(self, dx: int, dy: int) -> "EventStream":
        return EventStream(self.t, self.x + dx, self.y + dy, self.p)


@dataclass(frozen=True)
class VelocitySeries:
    values: np.ndarray
    magnitudes: np.ndarray


@dataclass(frozen=True)
class VelocityHistogram:
    bin_edges: np.ndarray
    probabilities: np.ndarray

    @property
    def bins(self) -> int:
        return len(self.probabilities)


def compute_velocity(traj: PupilTrajectory) -> VelocitySeries:
    """Forward differences ``(p[i+1] - p[i]) / sample_period``, length n-1."""
    if len(traj) < 2:
        raise TooShortError(f"velocity needs at least 2 samples, got {len(traj)}")
    if not np.all(np.isfinite(traj.xy)):
        raise NonFiniteError("trajectory contains non-finite samples")
    v = np.diff(traj.xy, axis=0) / traj.sample_period
    return VelocitySeries(values=v, magnitudes=np.hypot(v[:, 0], v[:, 1]))


def shared_edges(a: np.ndarray, b: np.ndarray, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Equal-width edges spanning the union of both value ranges."""
    if bins < 1:
        raise InvalidParamsError(f"bins must be >= 1, got {bins}")
    both = np.concatenate([np.ravel(a), np.ravel(b)])
    if both.size == 0:
        raise EmptyInputError("no values to bin")
    lo, hi = float(both.min()), float(both.max())
    if hi <= lo:
        # all values identical: any positive width yields the same histogram
        half = 0.5 * max(abs(lo), 1.0)
        lo, hi = lo - half, hi + half
    return np.linspace(lo, hi, bins + 1)


def soft_histogram(
    values,
    bin_edges,
    bandwidth: Optional[float] = None,
    eps_floor: float = DEFAULT_EPS_FLOOR,
    chunk: int = 8192,
) -> VelocityHistogram:
    """Triangular-kernel histogram with an epsilon floor on every bin.

    Each value spreads unit mass over the bin centres within ``bandwidth`` of
    it, with weight ``max(0, 1 - |v - c| / bandwidth)`` renormalised per value.
    Counts are normalised, ``eps_floor`` is added to every bin and the result
    renormalised, so every bin is strictly positive. ``bandwidth`` defaults to
    the mean bin width. A value that reaches no centre (possible only when the
    bandwidth is below half a bin) falls back to its containing bin.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    edges = np.asarray(bin_edges, dtype=np.float64)
    if values.size == 0:
        raise EmptyInputError("cannot histogram an empty sequence")
    if edges.ndim != 1 or edges.size < 2 or not np.all(np.diff(edges) > 0):
        raise DegenerateEdgesError("bin edges must be a strictly increasing sequence of length >= 2")
    if not np.all(np.isfinite(values)):
        raise NonFiniteError("histogram input contains non-finite values")
    if bandwidth is None:
        bandwidth = (edges[-1] - edges[0]) / (edges.size - 1)
    if not bandwidth > 0:
        raise InvalidParamsError(f"bandwidth must be positive, got {bandwidth}")
    if not eps_floor > 0:
        raise InvalidParamsError(f"eps_floor must be positive, got {eps_floor}")

    centres = 0.5 * (edges[:-1] + edges[1:])
    counts = np.zeros(centres.size)
    for start in range(0, values.size, chunk):
        v = values[start:start + chunk, None]
        w = np.maximum(0.0, 1.0 - np.abs(v - centres) / bandwidth)
        total = w.sum(axis=1)
        lost = total <= 0
        if np.any(lost):
            idx = np.clip(np.searchsorted(edges, v[lost, 0], side="right") - 1, 0, centres.size - 1)
            w[lost] = 0.0
            w[np.flatnonzero(lost), idx] = 1.0
            total[lost] = 1.0
        counts += (w / total[:, None]).sum(axis=0)

    prob = counts / counts.sum()
    prob = prob + eps_floor
    prob /= prob.sum()
    return VelocityHistogram(bin_edges=edges, probabilities=prob)
