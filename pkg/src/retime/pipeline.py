"""Preprocessing pipelines with a final on-the-fly resampling stage.

A pipeline runs in three steps:

1. test mode only: index-resample the raw input by `input_alpha` (the
   robustness test knob); in train mode this block is a no-op.
2. the spec's preprocessing stages, drawn from a fixed closed set (clip
   extraction, aspect-preserving resize, center crop, horizontal flip,
   mean subtraction, rescaling, segment sampling).
3. resample the preprocessed N frames down to the model's input length L
   with an alpha from the schedule (train) or a constant (test).

Per-sample randomness (clip offsets, flip coins) is keyed on
(rng_seed, sequence id), so data order never changes a sample's
augmentation.  Test mode uses centered clips and no flips.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np

from . import kernels
from .frames import FrameSequence, loop_to_min_length
from .rand import derive_key, stable_id_hash, uniform_at
from .resample import apply_index_plan, compute_index_plan, resample_by_rate_indexed
from .schedules import ScheduleState, next_alpha


@dataclass(frozen=True)
class ClipExtract:
    clip_len: int
    offset: Union[str, int] = "random"  # "random" or a fixed 0-based offset

    def __post_init__(self) -> None:
        if self.clip_len < 1:
            raise ValueError(f"clip_len must be >= 1, got {self.clip_len}")
        if isinstance(self.offset, str) and self.offset != "random":
            raise ValueError(f"offset must be 'random' or an integer, got {self.offset!r}")


@dataclass(frozen=True)
class ResizeMinSide:
    min_side: int

    def __post_init__(self) -> None:
        if self.min_side < 1:
            raise ValueError(f"min_side must be >= 1, got {self.min_side}")


@dataclass(frozen=True)
class CenterCrop:
    h: int
    w: int


@dataclass(frozen=True)
class HorizontalFlipRandom:
    p: float = 0.5


@dataclass(frozen=True)
class SubtractMeanRGB:
    r: float
    g: float
    b: float


@dataclass(frozen=True)
class SubtractMeanBlock:
    # .npy file holding a (16, H, W, C) mean block; empty path = zero block
    path: str = ""


@dataclass(frozen=True)
class RescaleRange:
    lo: float
    hi: float


@dataclass(frozen=True)
class SegmentSample:
    segments: int
    frames_per_segment: int

    def __post_init__(self) -> None:
        if self.segments < 1:
            raise ValueError(f"segments must be >= 1, got {self.segments}")
        if self.frames_per_segment < 1:
            raise ValueError(f"frames_per_segment must be >= 1, got {self.frames_per_segment}")


Stage = Union[
    ClipExtract,
    ResizeMinSide,
    CenterCrop,
    HorizontalFlipRandom,
    SubtractMeanRGB,
    SubtractMeanBlock,
    RescaleRange,
    SegmentSample,
]


@dataclass
class PipelineSpec:
    name: str
    stages: list[Stage]
    model_input_len: int
    notes: str = ""

    def __post_init__(self) -> None:
        if self.model_input_len < 1:
            raise ValueError(f"model_input_len must be >= 1, got {self.model_input_len}")
        clips = [s for s in self.stages if isinstance(s, ClipExtract)]
        segs = [s for s in self.stages if isinstance(s, SegmentSample)]
        if len(clips) > 1:
            raise ValueError("at most one ClipExtract stage is allowed")
        if len(segs) > 1:
            raise ValueError("at most one SegmentSample stage is allowed")
        if segs and self.model_input_len % segs[0].segments != 0:
            raise ValueError(
                f"model_input_len {self.model_input_len} must divide evenly into "
                f"{segs[0].segments} segments"
            )

    @property
    def segment_stage(self) -> SegmentSample | None:
        for s in self.stages:
            if isinstance(s, SegmentSample):
                return s
        return None


@lru_cache(maxsize=8)
def _load_mean_block(path: str) -> np.ndarray:
    block = np.load(path)
    if block.ndim != 4:
        raise ValueError(f"mean block at {path} must have shape (T, H, W, C), got {block.shape}")
    return np.ascontiguousarray(block, dtype=np.float64)


def segment_sample(
    seq: FrameSequence, segments: int, frames_per_segment: int, rng_seed: int = 0
) -> FrameSequence:
    """Evenly subsample to segments * frames_per_segment frames.

    Short inputs are looped first.  The result splits into `segments`
    contiguous equal blocks; picking a snippet inside each block is left to
    the final per-block resampling step, so rng_seed is currently unused.
    """
    target = segments * frames_per_segment
    seq = loop_to_min_length(seq, target)
    n = len(seq)
    if n == target:
        return seq
    idx = np.floor(np.arange(target, dtype=np.float64) * n / target).astype(np.int64)
    return seq.with_frames(seq.frames[idx])


def _resize_min_side(seq: FrameSequence, min_side: int) -> FrameSequence:
    n, h, w, _ = seq.frames.shape
    if h <= w:
        new_h = min_side
        new_w = max(1, int(np.floor(w * min_side / h + 0.5)))
    else:
        new_w = min_side
        new_h = max(1, int(np.floor(h * min_side / w + 0.5)))
    if (new_h, new_w) == (h, w):
        return seq
    out = np.empty((n, new_h, new_w, seq.frames.shape[3]), dtype=np.float64)
    for i in range(n):
        out[i] = kernels.bilinear_resize(seq.frames[i], new_h, new_w)
    return seq.with_frames(out)


def _center_crop(seq: FrameSequence, ch: int, cw: int) -> FrameSequence:
    _, h, w, _ = seq.frames.shape
    if h < ch or w < cw:
        raise ValueError(f"cannot crop {ch}x{cw} from {h}x{w} frames")
    top = (h - ch) // 2
    left = (w - cw) // 2
    return seq.with_frames(seq.frames[:, top : top + ch, left : left + cw, :])


def _apply_stage(
    seq: FrameSequence, stage: Stage, mode: str, sample_key: int, stage_idx: int
) -> FrameSequence:
    if isinstance(stage, ClipExtract):
        seq = loop_to_min_length(seq, stage.clip_len)
        span = len(seq) - stage.clip_len
        if stage.offset == "random":
            if mode == "train":
                offset = int(uniform_at(derive_key(sample_key, stage_idx), 0) * (span + 1))
                offset = min(offset, span)
            else:
                # deterministic at test time; anchored at the start like the
                # index-resampling formula itself
                offset = 0
        else:
            offset = int(stage.offset)
            if not 0 <= offset <= span:
                raise ValueError(f"fixed offset {offset} outside [0, {span}]")
        return seq.with_frames(seq.frames[offset : offset + stage.clip_len])

    if isinstance(stage, ResizeMinSide):
        return _resize_min_side(seq, stage.min_side)

    if isinstance(stage, CenterCrop):
        return _center_crop(seq, stage.h, stage.w)

    if isinstance(stage, HorizontalFlipRandom):
        if mode != "train":
            return seq
        coin = uniform_at(derive_key(sample_key, stage_idx), 0)
        if coin < stage.p:
            return seq.with_frames(seq.frames[:, :, ::-1, :])
        return seq

    if isinstance(stage, SubtractMeanRGB):
        if seq.frames.shape[3] != 3:
            raise ValueError(f"mean RGB subtraction needs 3 channels, got {seq.frames.shape[3]}")
        mean = np.array([stage.r, stage.g, stage.b], dtype=np.float64)
        return seq.with_frames(seq.frames - mean)

    if isinstance(stage, SubtractMeanBlock):
        if not stage.path:
            return seq  # zero block
        block = _load_mean_block(stage.path)
        if block.shape[1:] != seq.frames.shape[1:]:
            raise ValueError(
                f"mean block shape {block.shape[1:]} does not match frames "
                f"{seq.frames.shape[1:]}"
            )
        t = block.shape[0]
        reps = np.arange(len(seq)) % t  # applied cyclically over the clip
        return seq.with_frames(seq.frames - block[reps])

    if isinstance(stage, RescaleRange):
        scaled = stage.lo + (stage.hi - stage.lo) * seq.frames / 255.0
        return seq.with_frames(scaled)

    if isinstance(stage, SegmentSample):
        return segment_sample(seq, stage.segments, stage.frames_per_segment)

    raise TypeError(f"unknown stage {stage!r}")


def _final_resample(seq: FrameSequence, spec: PipelineSpec, alpha: float) -> FrameSequence:
    seg = spec.segment_stage
    if seg is None:
        plan = compute_index_plan(len(seq), spec.model_input_len, alpha)
        return apply_index_plan(seq, plan)
    # resample each segment block independently and concatenate
    per_block = spec.model_input_len // seg.segments
    block_len = len(seq) // seg.segments
    plan = compute_index_plan(block_len, per_block, alpha)
    parts = []
    for b in range(seg.segments):
        block = seq.frames[b * block_len : (b + 1) * block_len]
        parts.append(block[plan.indices - 1])
    return seq.with_frames(np.concatenate(parts, axis=0), id_suffix=f"@α={alpha:g}")


def run_pipeline(
    raw: FrameSequence,
    spec: PipelineSpec,
    mode: str,
    input_alpha: float = 1.0,
    schedule: ScheduleState | None = None,
    rng_seed: int = 0,
) -> FrameSequence:
    """Run the full pipeline and return exactly spec.model_input_len frames.

    mode "train": the input-rate block is bypassed, augmentation stages are
    live, and the final alpha is the schedule's next draw (advancing it).
    mode "test": the raw input is first index-resampled by `input_alpha`,
    augmentation is frozen (centered clips, no flips), and the final alpha
    is held at 1.0, or at the schedule's constant for constant schedules.
    """
    if mode not in ("train", "test"):
        raise ValueError(f"mode must be 'train' or 'test', got {mode!r}")
    if not input_alpha > 0:
        raise ValueError(f"input_alpha must be > 0, got {input_alpha}")

    sample_key = derive_key(rng_seed, stable_id_hash(raw.id))

    seq = raw
    if mode == "test":
        seq = resample_by_rate_indexed(seq, input_alpha)

    for stage_idx, stage in enumerate(spec.stages):
        seq = _apply_stage(seq, stage, mode, sample_key, stage_idx)

    if mode == "train":
        if schedule is None:
            raise ValueError("train mode needs a schedule")
        alpha = next_alpha(schedule)
    else:
        alpha = schedule.alpha_const if schedule is not None and schedule.kind == "constant" else 1.0

    return _final_resample(seq, spec, alpha)


_MEAN_RGB_VGG = (123.68, 116.78, 103.94)


def preset(model_name: str) -> PipelineSpec:
    """One of the bundled preprocessing pipelines, by model name."""
    name = model_name.lower()
    if name == "c3d":
        return PipelineSpec(
            name="c3d",
            stages=[
                ClipExtract(50, "random"),
                ResizeMinSide(112),
                CenterCrop(112, 112),
                SubtractMeanBlock(),
            ],
            model_input_len=16,
            notes="16-frame 112x112 clips, dataset mean block subtracted cyclically",
        )
    if name == "i3d":
        return PipelineSpec(
            name="i3d",
            stages=[
                ClipExtract(250, "random"),
                ResizeMinSide(256),
                CenterCrop(224, 224),
                RescaleRange(-1.0, 1.0),
            ],
            model_input_len=64,
            notes="64-frame 224x224 clips rescaled to [-1, 1]",
        )
    if name == "tsn":
        return PipelineSpec(
            name="tsn",
            stages=[
                SegmentSample(3, 60),
                ResizeMinSide(256),
                CenterCrop(224, 224),
                HorizontalFlipRandom(),
                SubtractMeanRGB(123.0, 117.0, 104.0),
            ],
            model_input_len=3,
            notes="3 segments of 60 frames, one snippet frame per segment",
        )
    if name == "resnet50_lstm":
        return PipelineSpec(
            name="resnet50_lstm",
            stages=[
                ClipExtract(250, "random"),
                ResizeMinSide(256),
                CenterCrop(224, 224),
                SubtractMeanRGB(*_MEAN_RGB_VGG),
            ],
            model_input_len=250,
            notes="full 250-frame clips for the recurrent head",
        )
    if name == "toy":
        return PipelineSpec(
            name="toy",
            stages=[ClipExtract(32, "random")],
            model_input_len=16,
            notes="synthetic 1d sequences, no spatial stages",
        )
    raise ValueError(f"unknown preset {model_name!r} (want c3d, i3d, tsn, resnet50_lstm, or toy)")


# --- config file round-trip -------------------------------------------------

_STAGE_NAMES = {
    ClipExtract: "clip_extract",
    ResizeMinSide: "resize_min_side",
    CenterCrop: "center_crop",
    HorizontalFlipRandom: "horizontal_flip_random",
    SubtractMeanRGB: "subtract_mean_rgb",
    SubtractMeanBlock: "subtract_mean_block",
    RescaleRange: "rescale_range",
    SegmentSample: "segment_sample",
}
_STAGE_BY_NAME = {v: k for k, v in _STAGE_NAMES.items()}


def _format_value(v: object) -> str:
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


def format_pipeline_config(spec: PipelineSpec) -> str:
    """Render a spec as the editable key/value + stage-list config format."""
    lines = [
        f"name = {spec.name}",
        f"model_input_len = {spec.model_input_len}",
    ]
    if spec.notes:
        lines.append(f"notes = {spec.notes}")
    for stage in spec.stages:
        kind = _STAGE_NAMES[type(stage)]
        args = " ".join(
            f"{k}={_format_value(v)}" for k, v in vars(stage).items() if v != ""
        )
        lines.append(f"stage = {kind} {args}".rstrip())
    return "\n".join(lines) + "\n"


def _parse_stage_line(body: str) -> Stage:
    parts = body.split()
    if not parts:
        raise ValueError("empty stage line")
    kind = parts[0]
    cls = _STAGE_BY_NAME.get(kind)
    if cls is None:
        raise ValueError(f"unknown stage kind {kind!r}")
    kwargs: dict[str, object] = {}
    for item in parts[1:]:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"bad stage argument {item!r}")
        if key == "offset" and value != "random":
            kwargs[key] = int(value)
        elif key in ("clip_len", "min_side", "h", "w", "segments", "frames_per_segment"):
            kwargs[key] = int(value)
        elif key in ("p", "r", "g", "b", "lo", "hi"):
            kwargs[key] = float(value)
        else:
            kwargs[key] = value
    return cls(**kwargs)


def parse_pipeline_config(text: str) -> PipelineSpec:
    """Parse the config format emitted by format_pipeline_config."""
    name = ""
    notes = ""
    model_input_len: int | None = None
    stages: list[Stage] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key = key.strip()
        value = value.strip()
        if key == "name":
            name = value
        elif key == "notes":
            notes = value
        elif key == "model_input_len":
            model_input_len = int(value)
        elif key == "stage":
            stages.append(_parse_stage_line(value))
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    if model_input_len is None:
        raise ValueError("config is missing model_input_len")
    return PipelineSpec(name=name, stages=stages, model_input_len=model_input_len, notes=notes)
