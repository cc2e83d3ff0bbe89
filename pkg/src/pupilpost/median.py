"""Motion-aware adaptive median filtering of predicted pupil trajectories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import PupilTrajectory
from .errors import InvalidParamsError, TooShortError
from .variance import VarianceMethod, local_motion_variance, window_bounds


@dataclass(frozen=True)
class MedianFilterParams:
    w_base: int = 5
    w_min: int = 5
    w_max: int = 20
    percentile: float = 75.0
    method: VarianceMethod = VarianceMethod.COVARIANCE

    def __post_init__(self):
        object.__setattr__(self, "method", VarianceMethod.parse(self.method))
        for name in ("w_base", "w_min", "w_max"):
            v = getattr(self, name)
            if int(v) != v:
                raise InvalidParamsError(f"{name} must be an integer, got {v}")
            object.__setattr__(self, name, int(v))
        if self.w_base < 2:
            raise InvalidParamsError(f"w_base must be >= 2, got {self.w_base}")
        if not 2 <= self.w_min <= self.w_max:
            raise InvalidParamsError(f"need 2 <= w_min <= w_max, got w_min={self.w_min}, w_max={self.w_max}")
        if not 0 < self.percentile < 100:
            raise InvalidParamsError(f"percentile must lie in (0, 100), got {self.percentile}")
        if self.odd_bounds[0] > self.odd_bounds[1]:
            raise InvalidParamsError(f"no odd window length fits in [{self.w_min}, {self.w_max}]")

    @property
    def odd_bounds(self) -> tuple[int, int]:
        lo = self.w_min if self.w_min % 2 else self.w_min + 1
        hi = self.w_max if self.w_max % 2 else self.w_max - 1
        return lo, hi


def odd_round(values) -> np.ndarray:
    """Nearest odd integer, ties rounding up."""
    return (2 * np.floor(np.asarray(values, float) / 2) + 1).astype(np.int64)


def rolling_mean(values: np.ndarray, w: int) -> np.ndarray:
    lo, hi = window_bounds(len(values), w)
    csum = np.concatenate([[0.0], np.cumsum(values)])
    return (csum[hi] - csum[lo]) / (hi - lo)


def rolling_percentile(values: np.ndarray, w: int, q: float) -> np.ndarray:
    n = len(values)
    lo, hi = window_bounds(n, w)
    out = np.empty(n)
    full = (hi - lo) == w
    if np.any(full):
        idx = np.flatnonzero(full)
        out[idx] = np.percentile(sliding_window_view(values, w)[lo[idx]], q, axis=1)
    for t in np.flatnonzero(~full):
        out[t] = np.percentile(values[lo[t]:hi[t]], q)
    return out


def adaptive_windows(profile, params: MedianFilterParams) -> np.ndarray:
    """Per-sample odd median-window lengths from a motion-variance profile.

    The smoothed variance is used directly as a sample count: it is clamped
    to ``[w_min, w_max]``, passed through a rolling percentile over
    ``w_base``, clamped again and rounded to the nearest odd length that
    stays within the odd-rounded bounds.
    """
    profile = np.asarray(profile, dtype=np.float64)
    if len(profile) < params.w_base:
        raise TooShortError(f"profile of length {len(profile)} is shorter than w_base={params.w_base}")
    smoothed = rolling_mean(profile, params.w_base)
    clamped = np.clip(smoothed, params.w_min, params.w_max)
    windows = np.clip(rolling_percentile(clamped, params.w_base, params.percentile), params.w_min, params.w_max)
    lo, hi = params.odd_bounds
    return np.clip(odd_round(windows), lo, hi)


def rolling_median(values: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Centred median with a per-sample window length, shrunk at the ends."""
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    out = np.empty(n)
    for w in np.unique(lengths):
        sel = np.flatnonzero(lengths == w)
        lo, hi = window_bounds(n, int(w))
        lo, hi = lo[sel], hi[sel]
        full = (hi - lo) == w
        if np.any(full):
            out[sel[full]] = np.median(sliding_window_view(values, int(w))[lo[full]], axis=1)
        for i, a, b in zip(sel[~full], lo[~full], hi[~full]):
            out[i] = np.median(values[a:b])
    return out


def motion_aware_median_filter(traj: PupilTrajectory, events=None, params: MedianFilterParams | None = None) -> PupilTrajectory:
    """Median-filter x and y independently with motion-adaptive windows.

    ``events`` is accepted so both refinement stages share a call shape; the
    filter itself only looks at the predictions.
    """
    return filter_with_windows(traj, params)[0]


def filter_with_windows(traj: PupilTrajectory, params: MedianFilterParams | None = None):
    """Like :func:`motion_aware_median_filter` but also returns the window lengths."""
    params = params or MedianFilterParams()
    lengths = adaptive_windows(local_motion_variance(traj, params.w_base, params.method), params)
    out = traj.with_xy(np.column_stack([rolling_median(traj.x, lengths), rolling_median(traj.y, lengths)]))
    return out, lengths
