"""Local motion-variance estimators that drive the adaptive median window.

All estimators work in pixels per sample, independent of the trajectory's
``sample_period``, so the clamp bounds of the median filter keep their
meaning as sample counts.

Windows are centred: sample ``t`` with window length ``w`` covers
``[t - w // 2, t + (w - 1) // 2]`` intersected with the indices where the
underlying quantity exists. Nothing is padded.
"""

from __future__ import annotations

import enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import PupilTrajectory
from .errors import InvalidParamsError, InvalidWindowError, TooShortError


class VarianceMethod(str, enum.Enum):
    DISPLACEMENT = "displacement"
    VELOCITY = "velocity"
    ACCELERATION = "acceleration"
    COVARIANCE = "covariance"
    FREQUENCY = "frequency"

    @classmethod
    def parse(cls, value) -> "VarianceMethod":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise InvalidParamsError(f"unknown variance method {value!r}; expected one of {names}") from None


def window_bounds(n: int, w: int, valid_lo: int = 0, valid_hi: int | None = None):
    """Inclusive-exclusive ``(lo, hi)`` index arrays of the centred windows.

    ``valid_lo``/``valid_hi`` restrict the window to indices where the
    windowed quantity is defined (``hi`` exclusive).
    """
    if valid_hi is None:
        valid_hi = n
    t = np.arange(n)
    lo = np.maximum(t - w // 2, valid_lo)
    hi = np.minimum(t + (w - 1) // 2 + 1, valid_hi)
    return lo, np.maximum(hi, lo)


def windowed_mean(series: np.ndarray, n: int, w: int, offset: int = 0) -> np.ndarray:
    """Centred mean of ``series`` for each of ``n`` samples.

    ``series[k]`` is attached to sample index ``k + offset``. Windows holding
    no element of ``series`` yield 0.
    """
    lo, hi = window_bounds(n, w, offset, offset + len(series))
    csum = np.concatenate([[0.0], np.cumsum(series)])
    count = hi - lo
    total = csum[hi - offset] - csum[lo - offset]
    out = np.zeros(n)
    np.divide(total, count, out=out, where=count > 0)
    return out


def _check(traj: PupilTrajectory, w_base: int) -> None:
    if int(w_base) != w_base or w_base < 2:
        raise InvalidWindowError(f"w_base must be an integer >= 2, got {w_base}")
    if len(traj) < w_base:
        raise TooShortError(f"trajectory of length {len(traj)} is shorter than w_base={w_base}")


def _window_cov_norm(frames: np.ndarray) -> np.ndarray:
    """Frobenius norm of the Bessel-corrected covariance, frames shaped (m, 2, L)."""
    length = frames.shape[-1]
    # shifting by the first point keeps constant windows exactly zero
    d = frames - frames[..., :1]
    d = d - d.mean(axis=-1, keepdims=True)
    c = np.einsum("mil,mjl->mij", d, d) / (length - 1)
    return np.sqrt(np.sum(c * c, axis=(1, 2)))


def _covariance_profile(xy: np.ndarray, w: int) -> np.ndarray:
    n = len(xy)
    lo, hi = window_bounds(n, w)
    full = (hi - lo) == w
    out = np.zeros(n)
    if np.any(full):
        idx = np.flatnonzero(full)
        frames = sliding_window_view(xy.T, w, axis=1)[:, lo[idx]]
        out[idx] = _window_cov_norm(np.moveaxis(frames, 0, 1))
    for t in np.flatnonzero(~full):
        if hi[t] - lo[t] >= 2:
            out[t] = _window_cov_norm(xy[lo[t]:hi[t]].T[None])[0]
    return out


def hann(length: int) -> np.ndarray:
    """Periodic Hann window."""
    k = np.arange(length)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * k / length)


def _frame_power_variance(frames: np.ndarray) -> np.ndarray:
    """Population variance over one-sided frequency bins of |STFT|^2, per frame."""
    length = frames.shape[-1]
    detrended = frames - frames[..., :1]
    detrended = detrended - detrended.mean(axis=-1, keepdims=True)
    spectrum = np.fft.rfft(detrended * hann(length), axis=-1)
    power = spectrum.real ** 2 + spectrum.imag ** 2
    return power.var(axis=-1)


def _frequency_profile(xy: np.ndarray, w: int) -> np.ndarray:
    n = len(xy)
    lo, hi = window_bounds(n, w)
    full = (hi - lo) == w
    out = np.zeros(n)
    if np.any(full):
        idx = np.flatnonzero(full)
        vx = _frame_power_variance(sliding_window_view(xy[:, 0], w)[lo[idx]])
        vy = _frame_power_variance(sliding_window_view(xy[:, 1], w)[lo[idx]])
        out[idx] = np.sqrt(vx + vy)
    for t in np.flatnonzero(~full):
        seg = xy[lo[t]:hi[t]]
        if len(seg) < 2:
            continue
        vx = _frame_power_variance(seg[None, :, 0])[0]
        vy = _frame_power_variance(seg[None, :, 1])[0]
        out[t] = np.sqrt(vx + vy)
    return out


def local_motion_variance(traj: PupilTrajectory, w_base: int, method=VarianceMethod.COVARIANCE) -> np.ndarray:
    """Per-sample local motion variance, one non-negative value per sample.

    Methods:

    * ``displacement``: mean of ``|p[t] - p[t-1]|`` over the window
    * ``velocity``: mean of ``|p[t+1] - p[t]|`` over the window
    * ``acceleration``: mean of ``|p[t+1] - 2 p[t] + p[t-1]|`` over the window
    * ``covariance``: Frobenius norm of the Bessel-corrected 2x2 covariance of
      the window's points
    * ``frequency``: ``sqrt(Var_f P_x + Var_f P_y)`` where ``P`` is the
      one-sided power spectrum of the mean-removed, Hann-windowed frame
      (population variance over bins)
    """
    method = VarianceMethod.parse(method)
    _check(traj, w_base)
    w = int(w_base)
    xy = traj.xy
    n = len(xy)

    if method is VarianceMethod.DISPLACEMENT:
        d = np.hypot(*np.diff(xy, axis=0).T)
        return windowed_mean(d, n, w, offset=1)
    if method is VarianceMethod.VELOCITY:
        v = np.hypot(*np.diff(xy, axis=0).T)
        return windowed_mean(v, n, w, offset=0)
    if method is VarianceMethod.ACCELERATION:
        if n < 3:
            return np.zeros(n)
        a = np.hypot(*np.diff(xy, n=2, axis=0).T)
        return windowed_mean(a, n, w, offset=1)
    if method is VarianceMethod.COVARIANCE:
        return _covariance_profile(xy, w)
    return _frequency_profile(xy, w)
