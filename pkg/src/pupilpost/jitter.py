"""Jitter Metric: temporal-smoothness agreement between two trajectories.

    JM = lam * |SPE_pred - SPE_true| / (|SPE_true| + eps)
         + (1 - lam) * log(1 + KL(P_pred || P_true))

SPE is a log-frequency-weighted spectral entropy of the velocity-magnitude
signal and ``P`` are soft histograms of velocity magnitudes over shared bin
edges. Lower is better; identical trajectories score exactly 0. The metric
is not bounded above. It runs in O(n log n + n b) for ``b`` histogram bins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_BINS,
    DEFAULT_EPS_FLOOR,
    PupilTrajectory,
    VelocityHistogram,
    compute_velocity,
    shared_edges,
    soft_histogram,
)
from .errors import (
    InvalidParamsError,
    LengthMismatchError,
    MismatchedBinsError,
    NonFiniteError,
    TooShortError,
    ZeroSupportError,
)


@dataclass(frozen=True)
class JitterParams:
    lam: float = 0.75
    epsilon: float = 1e-8
    bins: int = DEFAULT_BINS
    bandwidth: float = 1.0  # in bin widths
    eps_floor: float = DEFAULT_EPS_FLOOR

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise InvalidParamsError(f"lambda must lie in [0, 1], got {self.lam}")
        if not self.epsilon > 0:
            raise InvalidParamsError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.bins) != self.bins or self.bins < 2:
            raise InvalidParamsError(f"bins must be an integer >= 2, got {self.bins}")
        object.__setattr__(self, "bins", int(self.bins))
        if not self.bandwidth > 0:
            raise InvalidParamsError(f"bandwidth must be positive, got {self.bandwidth}")
        if not self.eps_floor > 0:
            raise InvalidParamsError(f"eps_floor must be positive, got {self.eps_floor}")


@dataclass(frozen=True)
class JitterBreakdown:
    jm: float
    spe_term: float
    kl_term: float
    spe_pred: float
    spe_true: float
    d_kl: float


def _signal(values, min_len: int) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size < min_len:
        raise TooShortError(f"need at least {min_len} samples, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("signal contains non-finite values")
    return v


def spectral_entropy(velocity_magnitudes, epsilon: float = 1e-8) -> float:
    """Log-frequency-weighted spectral entropy over positive DFT bins.

    Frequencies are integer bin indices ``1 .. n // 2`` of the unpadded,
    rectangular-window DFT, and the magnitudes are normalised over those
    same bins. A signal with no energy above DC scores 0; energy at higher
    bins drives the value further below zero.
    """
    v = _signal(velocity_magnitudes, 4)
    mag = np.abs(np.fft.rfft(v))[1:]
    freqs = np.arange(1, mag.size + 1, dtype=np.float64)
    weights = mag / (mag.sum() + epsilon)
    return float(-np.sum(np.log(freqs + epsilon) * weights))


def sparc_arc_length(velocity_magnitudes, amp_threshold: float = 0.05) -> float:
    """Spectral arc length of the max-normalised positive-frequency spectrum.

    The spectrum over bins ``1 .. n // 2`` is normalised by its peak and
    truncated after the last bin at or above ``amp_threshold``; the arc
    length is then taken from bin 1 to that cut-off with frequencies
    normalised to unit span. A spectrum with no energy is flat and yields
    ``-1``. More negative means jerkier.
    """
    v = _signal(velocity_magnitudes, 4)
    spectrum = np.abs(np.fft.rfft(v))
    mag = spectrum[1:]
    peak = mag.max()
    # energy at round-off level relative to DC counts as none
    if peak <= 1e-12 * spectrum[0]:
        peak = 0.0
    m = mag / peak if peak > 0 else np.zeros_like(mag)
    above = np.flatnonzero(m >= amp_threshold)
    stop = above[-1] + 1 if peak > 0 and above.size else m.size
    m = m[:stop]
    if m.size < 2:
        return 0.0
    f = np.arange(1, m.size + 1, dtype=np.float64)
    df = np.diff(f) / (f[-1] - f[0])
    return float(-np.sum(np.sqrt(df * df + np.diff(m) ** 2)))


def kl_divergence(p: VelocityHistogram, q: VelocityHistogram) -> float:
    """Discrete ``sum p log(p / q)`` on identical bin edges."""
    if p.bin_edges.shape != q.bin_edges.shape or not np.array_equal(p.bin_edges, q.bin_edges):
        raise MismatchedBinsError("histograms must share bin edges")
    pp, qq = p.probabilities, q.probabilities
    if np.any(pp <= 0) or np.any(qq <= 0):
        raise ZeroSupportError("histograms must have strictly positive bins")
    # rounding can leave a tiny negative sum for p ~= q; Gibbs' inequality says >= 0
    return max(0.0, float(np.sum(pp * np.log(pp / qq))))


def velocity_histograms(vp, vt, params: JitterParams):
    """Soft histograms of two velocity-magnitude series on shared edges."""
    edges = shared_edges(vp, vt, params.bins)
    bw = params.bandwidth * (edges[-1] - edges[0]) / params.bins
    return (
        soft_histogram(vp, edges, bw, params.eps_floor),
        soft_histogram(vt, edges, bw, params.eps_floor),
    )


def jitter_metric(pred: PupilTrajectory, truth: PupilTrajectory, params: JitterParams | None = None) -> JitterBreakdown:
    params = params or JitterParams()
    if len(pred) != len(truth):
        raise LengthMismatchError(f"pred has {len(pred)} samples, truth has {len(truth)}")
    if len(pred) < 5:
        raise TooShortError(f"jitter metric needs at least 5 samples, got {len(pred)}")
    vp = compute_velocity(pred).magnitudes
    vt = compute_velocity(truth).magnitudes

    spe_pred = spectral_entropy(vp, params.epsilon)
    spe_true = spectral_entropy(vt, params.epsilon)
    spe_term = abs(spe_pred - spe_true) / (abs(spe_true) + params.epsilon)

    d_kl = kl_divergence(*velocity_histograms(vp, vt, params))
    kl_term = float(np.log1p(d_kl))
    jm = params.lam * spe_term + (1.0 - params.lam) * kl_term
    return JitterBreakdown(jm=jm, spe_term=spe_term, kl_term=kl_term, spe_pred=spe_pred, spe_true=spe_true, d_kl=d_kl)
