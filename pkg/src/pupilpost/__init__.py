"""Post-processing and jitter evaluation for event-based pupil trajectories."""

from .core import (
    Event,
    EventStream,
    PupilTrajectory,
    VelocityHistogram,
    VelocitySeries,
    compute_velocity,
    shared_edges,
    soft_histogram,
)
from .flow import FlowParams, cumulative_flow, events_in_roi, prediction_timestep, refine_predictions, roi_half_size
from .jitter import (
    JitterBreakdown,
    JitterParams,
    jitter_metric,
    kl_divergence,
    sparc_arc_length,
    spectral_entropy,
)
from .median import MedianFilterParams, adaptive_windows, motion_aware_median_filter
from .metrics import MetricsReport, evaluate
from .perturb import Blink, NoiseLowAmp, PerturbationSpec, PixelShift, Tremor, perturb
from .variance import VarianceMethod, local_motion_variance

__version__ = "0.1.0"
