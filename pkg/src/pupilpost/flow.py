"""Rule-based event optical flow that nudges filtered predictions by one pixel.

For every prediction the event stream is cut into consecutive time slots of
equal length. Events of the slot that fall in a square ROI around the
prediction are counted; when there are more than ``tau * 10`` of them the
prediction moves one pixel along the cumulative flow of those events
(last event position minus first). The ROI half-size grows to
``(1 + c) * tau`` after a jump larger than ``tau * gamma`` relative to the
mean of the previous ``c`` predictions and otherwise falls back to ``tau``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Event, EventStream, PupilTrajectory
from .errors import EmptyStreamError, EmptyTrajectoryError, InvalidParamsError, ZeroSpanError


@dataclass(frozen=True)
class FlowParams:
    tau: float = 8.0
    c: int = 5
    gamma: float = 2.0

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidParamsError(f"tau must be positive, got {self.tau}")
        if int(self.c) != self.c or self.c < 1:
            raise InvalidParamsError(f"c must be an integer >= 1, got {self.c}")
        if not self.gamma > 0:
            raise InvalidParamsError(f"gamma must be positive, got {self.gamma}")
        object.__setattr__(self, "c", int(self.c))

    @property
    def initial_radius(self) -> float:
        return self.tau * 10

    @property
    def count_gate(self) -> float:
        return self.tau * 10


@dataclass
class RoiState:
    half_size: float
    prev_timestamp: float
    timestep: float


def prediction_timestep(stream: EventStream, n_predictions: int) -> float:
    """Event-stream duration divided evenly among the predictions (microseconds)."""
    if len(stream) == 0:
        raise EmptyStreamError("event stream is empty")
    if n_predictions < 1:
        raise EmptyTrajectoryError("need at least one prediction")
    span = float(stream.t[-1] - stream.t[0])
    if span <= 0:
        raise ZeroSpanError(f"all events share timestamp {int(stream.t[0])}")
    return span / n_predictions


def roi_half_size(recent, params: FlowParams, current_r: float) -> float:
    """ROI half-size given the latest ``c + 1`` filtered predictions.

    ``recent`` is ordered oldest first and ends with the current prediction.
    With a shorter history the radius is left unchanged.
    """
    recent = np.asarray(recent, dtype=np.float64).reshape(-1, 2)
    if len(recent) < params.c + 1:
        return current_r
    recent = recent[-(params.c + 1):]
    diff = np.abs(recent[-1] - recent[:-1].mean(axis=0))
    if np.any(diff > params.tau * params.gamma):
        return (1 + params.c) * params.tau
    # the literal shrink rule (1 - c) * tau is negative for c >= 1
    return max(params.tau, (1 - params.c) * params.tau)


def _roi_mask(stream: EventStream, lo: int, hi: int, center, r: float) -> np.ndarray:
    xs = stream.x[lo:hi]
    ys = stream.y[lo:hi]
    return (np.abs(xs - center[0]) <= r) & (np.abs(ys - center[1]) <= r)


def events_in_roi(stream: EventStream, t_lo: float, t_hi: float, center, r: float) -> list[Event]:
    """Events with ``t_lo <= t < t_hi`` inside the square ROI, in time order."""
    if t_lo > t_hi:
        raise InvalidParamsError(f"t_lo={t_lo} exceeds t_hi={t_hi}")
    if not r > 0:
        raise InvalidParamsError(f"ROI half-size must be positive, got {r}")
    lo = int(np.searchsorted(stream.t, t_lo, side="left"))
    hi = int(np.searchsorted(stream.t, t_hi, side="left"))
    idx = lo + np.flatnonzero(_roi_mask(stream, lo, hi, center, r))
    return [stream[i] for i in idx]


def cumulative_flow(roi_events) -> tuple[float, float]:
    """Telescoped displacement of consecutive events: last minus first."""
    if len(roi_events) < 2:
        return 0.0, 0.0
    first, last = roi_events[0], roi_events[-1]
    return float(last.x - first.x), float(last.y - first.y)


def refine_predictions(stream: EventStream, filtered: PupilTrajectory, params: FlowParams | None = None) -> PupilTrajectory:
    out, _ = refine_with_trace(stream, filtered, params)
    return out


def refine_with_trace(stream: EventStream, filtered: PupilTrajectory, params: FlowParams | None = None):
    """Refine predictions and also return a per-prediction trace.

    The trace is a dict of arrays: ``radius`` (ROI half-size used),
    ``count`` (events in the ROI) and ``shifted`` (whether a unit shift was
    applied).
    """
    params = params or FlowParams()
    if len(stream) == 0:
        raise EmptyStreamError("event stream is empty")
    n = len(filtered)
    if n == 0:
        raise EmptyTrajectoryError("no predictions to refine")
    timestep = prediction_timestep(stream, n)
    t_start = float(stream.t[0])
    state = RoiState(half_size=params.initial_radius, prev_timestamp=t_start, timestep=timestep)

    xy = filtered.xy
    refined = xy.copy()
    radius = np.empty(n)
    count = np.zeros(n, dtype=np.int64)
    shifted = np.zeros(n, dtype=bool)
    t_sorted = stream.t
    for j in range(n):
        current = t_start + (j + 1) * state.timestep
        state.half_size = roi_half_size(xy[max(0, j - params.c):j + 1], params, state.half_size)
        lo = int(np.searchsorted(t_sorted, state.prev_timestamp, side="left"))
        hi = int(np.searchsorted(t_sorted, current, side="left"))
        idx = lo + np.flatnonzero(_roi_mask(stream, lo, hi, xy[j], state.half_size))
        state.prev_timestamp = current
        radius[j] = state.half_size
        count[j] = idx.size
        if idx.size > params.count_gate:
            dx = float(stream.x[idx[-1]] - stream.x[idx[0]])
            dy = float(stream.y[idx[-1]] - stream.y[idx[0]])
            norm = float(np.hypot(dx, dy))
            if norm > 0:
                refined[j] = xy[j] + np.array([dx, dy]) / norm
                shifted[j] = True
    return filtered.with_xy(refined), {"radius": radius, "count": count, "shifted": shifted}
