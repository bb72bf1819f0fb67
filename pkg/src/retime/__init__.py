"""retime: temporal resampling of frame sequences for rate-robust training.

The package covers index-based and interpolated temporal resampling,
resampling-factor schedules for training, preprocessing pipelines with an
on-the-fly resampling stage, rate-modified dataset generation, and an
input-rate robustness evaluation harness, plus a synthetic desk-scale rig
that demonstrates the stability gain end to end.
"""

from .frames import FrameSequence, loop_to_min_length
from .kernels import BACKEND as KERNEL_BACKEND
from .resample import (
    IndexPlan,
    apply_index_plan,
    compute_index_plan,
    interpolate_at,
    resample_by_rate_indexed,
    resample_by_rate_interpolated,
)
from .schedules import ScheduleState, alpha_histogram, next_alpha, parse_schedule

__version__ = "0.1.0"

__all__ = [
    "FrameSequence",
    "IndexPlan",
    "KERNEL_BACKEND",
    "ScheduleState",
    "alpha_histogram",
    "apply_index_plan",
    "compute_index_plan",
    "interpolate_at",
    "loop_to_min_length",
    "next_alpha",
    "parse_schedule",
    "resample_by_rate_indexed",
    "resample_by_rate_interpolated",
]
