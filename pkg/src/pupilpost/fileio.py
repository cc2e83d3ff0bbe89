"""Plain-text file formats for trajectories, events and metric reports.

Trajectories: header ``t,x,y`` or ``x,y``, one sample per LF-terminated line,
``.`` as decimal point. Timestamps, when present, must increase strictly and
be uniformly spaced to within 1 microsecond.

Events: header ``t,x,y,p`` with integer microsecond timestamps in
non-decreasing order, integer pixel coordinates and polarity in {-1, 0, 1}
(0 is read as -1).

Reports: ``key=value`` lines in a fixed key order, numbers with six digits
after the decimal point, followed by ``param.<name>=<value>`` lines echoing
the effective configuration.

Readers reject malformed input with :class:`~pupilpost.errors.ParseError`
carrying the 1-based line and column; nothing is repaired.
"""

from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .core import EventStream, PupilTrajectory
from .errors import EmptyInputError, NonUniformSamplingError, ParseError, SortError
from .jitter import JitterBreakdown
from .metrics import MetricsReport

TIME_TOLERANCE_US = 1.0
POLARITY_MAP = {-1: -1, 0: -1, 1: 1}


def _read_lines(path) -> list[str]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        text = fh.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for i, line in enumerate(lines, start=1):
        if "\r" in line:
            raise ParseError(i, line.index("\r") + 1, "carriage return; expected LF line endings", path)
    return lines


def _fields(line: str, lineno: int, ncols: int, path) -> list[str]:
    if line == "":
        raise ParseError(lineno, 1, "empty line", path)
    fields = line.split(",")
    if len(fields) != ncols:
        raise ParseError(lineno, min(len(fields), ncols) + 1, f"expected {ncols} columns, found {len(fields)}", path)
    return fields


def _float(text: str, lineno: int, col: int, path) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(lineno, col, f"not a number: {text!r}", path) from None
    if text != text.strip() or not math.isfinite(value):
        raise ParseError(lineno, col, f"not a finite decimal number: {text!r}", path)
    return value


def _int(text: str, lineno: int, col: int, path) -> int:
    try:
        if text != text.strip():
            raise ValueError
        return int(text)
    except ValueError:
        raise ParseError(lineno, col, f"not an integer: {text!r}", path) from None


def read_trajectory(path) -> PupilTrajectory:
    lines = _read_lines(path)
    if not lines:
        raise EmptyInputError(f"{path}: file is empty")
    header = lines[0]
    if header == "t,x,y":
        timed = True
    elif header == "x,y":
        timed = False
    else:
        raise ParseError(1, 1, f"header must be 't,x,y' or 'x,y', got {header!r}", path)
    if len(lines) < 2:
        raise EmptyInputError(f"{path}: no samples after header")

    ncols = 3 if timed else 2
    rows = np.empty((len(lines) - 1, ncols))
    for lineno, line in enumerate(lines[1:], start=2):
        for col, text in enumerate(_fields(line, lineno, ncols, path), start=1):
            rows[lineno - 2, col - 1] = _float(text, lineno, col, path)

    if not timed:
        return PupilTrajectory(rows)
    t = rows[:, 0]
    n = len(t)
    if n == 1:
        return PupilTrajectory(rows[:, 1:], 1.0, float(t[0]))
    dt = np.diff(t)
    bad = np.flatnonzero(dt <= 0)
    if bad.size:
        raise SortError(int(bad[0]) + 3, "timestamps must increase strictly", path)
    period = (t[-1] - t[0]) / (n - 1)
    off = np.abs(t - (t[0] + np.arange(n) * period))
    if np.any(off > TIME_TOLERANCE_US):
        k = int(np.argmax(off > TIME_TOLERANCE_US))
        raise NonUniformSamplingError(
            f"{path}: line {k + 2}: timestamp {t[k]} deviates {off[k]:.3f} us from uniform spacing {period}")
    return PupilTrajectory(rows[:, 1:], float(period), float(t[0]))


def _fmt_float(v: float) -> str:
    return repr(float(v))


def _fmt_time(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    if not path.parent.is_dir():
        raise FileNotFoundError(2, "directory does not exist", str(path))
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_trajectory(traj: PupilTrajectory, path) -> None:
    ts = traj.timestamps()
    if ts is None:
        body = "".join(f"{_fmt_float(x)},{_fmt_float(y)}\n" for x, y in traj.xy)
        _atomic_write(path, "x,y\n" + body)
    else:
        body = "".join(f"{_fmt_time(t)},{_fmt_float(x)},{_fmt_float(y)}\n" for t, (x, y) in zip(ts, traj.xy))
        _atomic_write(path, "t,x,y\n" + body)


def read_events(path, sensor_width: Optional[int] = None, sensor_height: Optional[int] = None) -> EventStream:
    lines = _read_lines(path)
    if not lines:
        raise EmptyInputError(f"{path}: file is empty")
    if lines[0] != "t,x,y,p":
        raise ParseError(1, 1, f"header must be 't,x,y,p', got {lines[0]!r}", path)
    n = len(lines) - 1
    cols = np.empty((4, n), dtype=np.int64)
    prev_t = None
    for lineno, line in enumerate(lines[1:], start=2):
        f = _fields(line, lineno, 4, path)
        t = _int(f[0], lineno, 1, path)
        if t < 0:
            raise ParseError(lineno, 1, f"negative timestamp {t}", path)
        if prev_t is not None and t < prev_t:
            raise SortError(lineno, f"timestamp {t} precedes {prev_t}", path)
        prev_t = t
        x = _int(f[1], lineno, 2, path)
        y = _int(f[2], lineno, 3, path)
        p = _int(f[3], lineno, 4, path)
        if p not in POLARITY_MAP:
            raise ParseError(lineno, 4, f"polarity must be -1, 0 or 1, got {p}", path)
        cols[:, lineno - 2] = (t, x, y, POLARITY_MAP[p])
    return EventStream(cols[0], cols[1], cols[2], cols[3], sensor_width, sensor_height)


def write_events(stream: EventStream, path) -> None:
    body = "".join(f"{e.t},{e.x},{e.y},{e.p}\n" for e in stream)
    _atomic_write(path, "t,x,y,p\n" + body)


def threshold_key(th: float) -> str:
    return "p" + format(float(th), "g")


def format_number(v: float) -> str:
    return f"{float(v):.6f}"


def report_lines(metrics: MetricsReport, jitter: JitterBreakdown, params: Optional[Mapping[str, object]] = None) -> list[str]:
    lines = [f"n={metrics.n}"]
    for th, acc in metrics.p_at.items():
        lines.append(f"{threshold_key(th)}={format_number(acc)}")
    for key, val in (
        ("l1", metrics.l1),
        ("l2", metrics.l2),
        ("mse", metrics.mse),
        ("jm", jitter.jm),
        ("spe_term", jitter.spe_term),
        ("kl_term", jitter.kl_term),
        ("d_kl", jitter.d_kl),
        ("spe_pred", jitter.spe_pred),
        ("spe_true", jitter.spe_true),
    ):
        if not math.isfinite(val):
            raise ValueError(f"report field {key} is not finite: {val}")
        lines.append(f"{key}={format_number(val)}")
    for key, val in (params or {}).items():
        lines.append(f"param.{key}={val}")
    return lines


def write_report(metrics: MetricsReport, jitter: JitterBreakdown, path, params: Optional[Mapping[str, object]] = None) -> None:
    _atomic_write(path, "\n".join(report_lines(metrics, jitter, params)) + "\n")


def read_report(path) -> dict:
    """Parse a report back into a dict; numeric fields become floats (``n`` an int)."""
    out = {}
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError(lineno, 1, "expected key=value", path)
        if key.startswith("param."):
            out[key] = value
        elif key == "n":
            out[key] = _int(value, lineno, len(key) + 2, path)
        else:
            out[key] = _float(value, lineno, len(key) + 2, path)
    return out


def write_plot_data(path, truth: PupilTrajectory, raw: PupilTrajectory, refined: PupilTrajectory) -> None:
    """Per-sample ``t,x_true,x_pred_raw,x_pred_refined`` for figure regeneration."""
    ts = truth.timestamps()
    if ts is None:
        ts = np.arange(len(truth), dtype=float)
    body = "".join(
        f"{_fmt_time(t)},{_fmt_float(a)},{_fmt_float(b)},{_fmt_float(c)}\n"
        for t, a, b, c in zip(ts, truth.x, raw.x, refined.x)
    )
    _atomic_write(path, "t,x_true,x_pred_raw,x_pred_refined\n" + body)
