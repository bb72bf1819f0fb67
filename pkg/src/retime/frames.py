"""Frame sequence container.

A FrameSequence is an ordered stack of equally-shaped frames with an
identifier.  Frames are stored as one float64 array of shape (N, H, W, C);
8-bit inputs are promoted to real values in [0, 255].  Instances are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class FrameSequence:
    id: str
    frames: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.frames, dtype=np.float64)
        if arr.ndim == 2:  # (N, D) convenience: one row per frame
            arr = arr[:, np.newaxis, :, np.newaxis]
        if arr.ndim != 4:
            raise ValueError(f"frames must have shape (N, H, W, C), got {self.frames.shape}")
        if arr.shape[0] < 1:
            raise ValueError("a FrameSequence needs at least one frame")
        arr.flags.writeable = False
        object.__setattr__(self, "frames", arr)

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def frame_shape(self) -> tuple[int, int, int]:
        return self.frames.shape[1:]

    def frame(self, i: int) -> np.ndarray:
        """Frame at 1-based index i."""
        if not 1 <= i <= len(self):
            raise ValueError(f"frame index {i} outside [1, {len(self)}]")
        return self.frames[i - 1]

    def with_frames(self, frames: np.ndarray, id_suffix: str = "") -> "FrameSequence":
        return FrameSequence(self.id + id_suffix, frames)


def loop_to_min_length(seq: FrameSequence, min_len: int) -> FrameSequence:
    """Repeat the whole sequence (wrap-around) until it has >= min_len frames.

    Sequences already long enough are returned unchanged; otherwise the
    result is truncated to exactly min_len, so the output length is always
    max(len(seq), min_len).
    """
    if min_len < 1:
        raise ValueError(f"min_len must be positive, got {min_len}")
    n = len(seq)
    if n >= min_len:
        return seq
    reps = -(-min_len // n)  # ceil
    tiled = np.concatenate([seq.frames] * reps, axis=0)[:min_len]
    return seq.with_frames(tiled)
