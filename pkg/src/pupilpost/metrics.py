"""Positional accuracy: p-accuracy at pixel thresholds, mean l2/l1 distance, MSE.

Means use correctly rounded summation (``math.fsum``), so results do not
depend on summation order.
"""

from __future__ import annotations

import math

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import PupilTrajectory
from .errors import EmptyInputError, InvalidParamsError, LengthMismatchError

DEFAULT_THRESHOLDS = (10.0, 5.0, 1.0)


@dataclass(frozen=True)
class MetricsReport:
    p_at: dict
    l2: float
    l1: float
    mse: float
    n: int


def evaluate(pred: PupilTrajectory, truth: PupilTrajectory, thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> MetricsReport:
    """Score ``pred`` against ``truth`` sample by sample.

    ``p_at[th]`` is the fraction of samples whose Euclidean error is at most
    ``th`` pixels; ``l1`` is the mean Manhattan distance and ``mse`` the mean
    squared Euclidean distance.
    """
    if len(pred) != len(truth):
        raise LengthMismatchError(f"pred has {len(pred)} samples, truth has {len(truth)}")
    if len(pred) == 0:
        raise EmptyInputError("cannot evaluate empty trajectories")
    if any(not th > 0 for th in thresholds):
        raise InvalidParamsError(f"thresholds must be positive, got {list(thresholds)}")
    n = len(pred)
    d = pred.xy - truth.xy
    sq = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]
    euclid = np.sqrt(sq)
    manhattan = np.abs(d[:, 0]) + np.abs(d[:, 1])
    p_at = {float(th): int(np.count_nonzero(euclid <= th)) / n for th in thresholds}
    return MetricsReport(
        p_at=p_at,
        l2=math.fsum(euclid.tolist()) / n,
        l1=math.fsum(manhattan.tolist()) / n,
        mse=math.fsum(sq.tolist()) / n,
        n=n,
    )
