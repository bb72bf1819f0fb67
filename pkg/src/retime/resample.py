"""Temporal resampling primitives.

Two families live here:

* index resampling: pick source frames by the plan l_i = floor(alpha * i),
  clamped into [1, N].  alpha > 1 drops frames (speed-up), alpha < 1
  repeats them (slow-down).  Used as the on-the-fly resampling step and as
  the test-time input-rate knob.
* interpolated resampling: sample the sequence at fractional positions and
  blend neighboring frames linearly.  Used to synthesize rate-modified
  copies of a dataset, where non-integer frames need actual content.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .frames import FrameSequence


@dataclass(frozen=True)
class IndexPlan:
    """A resolved list of 1-based source indices for one (N, L, alpha)."""

    alpha: float
    source_len: int
    target_len: int
    indices: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        idx = np.ascontiguousarray(self.indices, dtype=np.int64)
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)


def compute_index_plan(source_len: int, target_len: int, alpha: float) -> IndexPlan:
    """Index plan mapping target position i to source frame floor(alpha * i).

    Values that floor to 0 are clamped up to 1 and values that reach or
    exceed source_len are clamped down to source_len, so every index is a
    valid 1-based source position.  Pure and deterministic.
    """
    if source_len < 1:
        raise ValueError(f"source_len must be >= 1, got {source_len}")
    if target_len < 1:
        raise ValueError(f"target_len must be >= 1, got {target_len}")
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    indices = kernels.eq1_indices(source_len, target_len, alpha)
    return IndexPlan(alpha=alpha, source_len=source_len, target_len=target_len, indices=indices)


def apply_index_plan(seq: FrameSequence, plan: IndexPlan) -> FrameSequence:
    """Gather frames according to a plan computed for this sequence length."""
    if plan.source_len != len(seq):
        raise ValueError(
            f"plan was computed for {plan.source_len} frames but sequence has {len(seq)}"
        )
    picked = seq.frames[plan.indices - 1]
    return seq.with_frames(picked, id_suffix=f"@α={plan.alpha:g}")


def resample_by_rate_indexed(seq: FrameSequence, alpha: float) -> FrameSequence:
    """Index-resample a whole sequence by rate alpha.

    The output holds max(1, floor(N / alpha)) frames: alpha > 1 speeds the
    sequence up, alpha < 1 slows it down with repeated frames.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    n = len(seq)
    target_len = max(1, math.floor(n / alpha))
    plan = compute_index_plan(n, target_len, alpha)
    return apply_index_plan(seq, plan)


def interpolate_at(seq: FrameSequence, t: float) -> np.ndarray:
    """Frame content at fractional 1-based position t (clamped to [1, N]).

    With f = floor(t) and w = t - f the result is the per-pixel convex
    combination (1-w) * frames[f] + w * frames[f+1]; integer t reproduces
    the source frame exactly.
    """
    n, h, w_, c = seq.frames.shape
    flat = seq.frames.reshape(n, h * w_ * c)
    pos = np.asarray([float(t)], dtype=np.float64)
    out = kernels.linear_resample(flat, pos)
    return out.reshape(h, w_, c)


def interp_positions(source_len: int, target_len: int, rate: float) -> np.ndarray:
    """Fractional source positions 1 + (j-1)*rate, clamped to [1, N]."""
    pos = 1.0 + np.arange(target_len, dtype=np.float64) * rate
    return np.clip(pos, 1.0, float(source_len))


def resample_by_rate_interpolated(seq: FrameSequence, rate: float) -> FrameSequence:
    """Resample by blending frames at fractional positions spaced by `rate`.

    The output holds max(1, round(N / rate)) frames (round half up);
    rate < 1 stretches the action with synthesized in-between frames,
    rate > 1 compresses it.  rate = 1.0 is a bit-exact identity.
    """
    if not rate > 0:
        raise ValueError(f"rate must be > 0, got {rate}")
    n, h, w_, c = seq.frames.shape
    target_len = max(1, math.floor(n / rate + 0.5))
    pos = interp_positions(n, target_len, rate)
    flat = seq.frames.reshape(n, h * w_ * c)
    out = kernels.linear_resample(flat, pos)
    return seq.with_frames(out.reshape(target_len, h, w_, c), id_suffix=f"@r={rate:g}")
