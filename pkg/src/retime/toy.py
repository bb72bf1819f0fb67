"""Desk-scale verification rig.

A synthetic moving-bump dataset plus a from-scratch linear softmax
classifier.  Classes differ in how a Gaussian bump sweeps across a 1d
frame over time (linear, quadratic, or sinusoidal trajectories in either
direction), and every sample is stretched by a per-sample natural rate, so
playback speed is the dominant nuisance factor.  The classifier flattens
its input frames, which makes it deliberately rate-sensitive: exactly the
failure mode the resampling schedules are meant to fix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .frames import FrameSequence
from .pipeline import PipelineSpec, run_pipeline
from .rand import derive_key
from .schedules import ScheduleState, format_schedule

BUMP_WIDTH = 2.0


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int):
        super().__init__(f"loss became non-finite in epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class SyntheticSpec:
    num_classes: int = 6
    frames_per_sample: int = 40
    frame_dim: int = 32
    samples_per_class: int = 200
    rate_lo: float = 0.7
    rate_hi: float = 1.3
    noise_sigma: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.num_classes, self.frames_per_sample, self.frame_dim,
               self.samples_per_class) < 1:
            raise ValueError("all synthetic counts must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not 0 < self.rate_lo <= self.rate_hi:
            raise ValueError(f"need 0 < rate_lo <= rate_hi, got {self.rate_lo}, {self.rate_hi}")


@dataclass
class LabeledSequence:
    seq: FrameSequence
    label: int
    split: str


@dataclass
class SyntheticDataset:
    name: str
    samples: list[LabeledSequence]
    num_classes: int

    @property
    def train(self) -> list[LabeledSequence]:
        return [s for s in self.samples if s.split == "train"]

    @property
    def test(self) -> list[LabeledSequence]:
        return [s for s in self.samples if s.split == "test"]


def class_trajectory(spec: SyntheticSpec, cls: int, tau: np.ndarray) -> np.ndarray:
    """Bump center positions for class `cls` at action progress values tau.

    Classes cycle through three trajectory families (linear, quadratic,
    sinusoidal), each confined to its own spatial lane; repeats of a family
    flip the direction (and, past the first repeat, raise the sinusoid
    frequency).  Paired classes share a lane and differ only in how the
    bump moves through it, so motion, not position, carries the class bit.
    Progress saturates at 1: the bump holds its end position once the
    action completes.
    """
    d = spec.frame_dim
    family = cls % 3
    variant = cls // 3
    center = (d - 1) * (1.0 + 2.0 * family) / 6.0
    amp = 0.13 * (d - 1)
    g = np.clip(tau, 0.0, 1.0)
    direction = 1.0 if variant % 2 == 0 else -1.0
    if family == 0:  # linear sweep across the lane
        return center + direction * amp * (2.0 * g - 1.0)
    if family == 1:  # quadratic: slow start, fast finish
        return center + direction * amp * (2.0 * g**2 - 1.0)
    # sinusoidal excursion inside the lane; the base frequency is one half
    # cycle so the visited side of the lane is unambiguous at any speed
    freq = 0.5 * (1.0 + variant // 2)
    return center + direction * amp * np.sin(2.0 * np.pi * freq * g)


# fraction of a sample's frames the action occupies at natural rate 1; the
# remainder holds the final pose, so a model-input window anchored at the
# start sees the whole action
ACTION_SPAN = 0.5


def render_sample(
    spec: SyntheticSpec, cls: int, rate: float, phase: float, sample_id: str = ""
) -> FrameSequence:
    """Noise-free sample for (class, rate, phase); pure and deterministic.

    Frame t shows a Gaussian bump (amplitude 1, width 2) centered on the
    class trajectory at progress tau = rate * t / (ACTION_SPAN * (T - 1));
    phase in [0, 1) shifts the progress slightly so samples are not
    pixel-identical.
    """
    t = np.arange(spec.frames_per_sample, dtype=np.float64)
    denom = max(ACTION_SPAN * (spec.frames_per_sample - 1), 1.0)
    tau = rate * t / denom + (phase - 0.5) * 0.1
    positions = class_trajectory(spec, cls, tau)
    x = np.arange(spec.frame_dim, dtype=np.float64)
    frames = np.exp(-((x[np.newaxis, :] - positions[:, np.newaxis]) ** 2)
                    / (2.0 * BUMP_WIDTH**2))
    sid = sample_id or f"syn{cls}_r{rate:.3f}_p{phase:.3f}"
    return FrameSequence(sid, frames[:, np.newaxis, :, np.newaxis])


def generate_synthetic(spec: SyntheticSpec) -> SyntheticDataset:
    """The full synthetic dataset, 80/20 train/test stratified by class."""
    samples: list[LabeledSequence] = []
    train_per_class = round(0.8 * spec.samples_per_class)
    for cls in range(spec.num_classes):
        for k in range(spec.samples_per_class):
            rng = np.random.default_rng(derive_key(spec.seed, cls, k))
            rate = spec.rate_lo + (spec.rate_hi - spec.rate_lo) * rng.uniform()
            phase = rng.uniform()
            sample = render_sample(spec, cls, rate, phase, sample_id=f"syn{cls}_{k:03d}")
            if spec.noise_sigma > 0:
                noisy = sample.frames + rng.normal(0.0, spec.noise_sigma, sample.frames.shape)
                sample = FrameSequence(sample.id, noisy)
            split = "train" if k < train_per_class else "test"
            samples.append(LabeledSequence(sample, cls, split))
    return SyntheticDataset(name="synthetic", samples=samples, num_classes=spec.num_classes)


# --- classifier ---------------------------------------------------------------


@dataclass
class ToyClassifier:
    weights: np.ndarray  # (num_classes, input_len * frame_dim)
    bias: np.ndarray  # (num_classes,)
    input_len: int
    trained_config: str = ""
    loss_history: list[float] = field(default_factory=list, compare=False, repr=False)

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]


def zero_classifier(num_classes: int, input_len: int, frame_dim: int) -> ToyClassifier:
    dim = input_len * frame_dim
    return ToyClassifier(
        weights=np.zeros((num_classes, dim)), bias=np.zeros(num_classes), input_len=input_len
    )


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def _as_vector(model: ToyClassifier, x: FrameSequence | np.ndarray) -> np.ndarray:
    vec = x.frames.ravel() if isinstance(x, FrameSequence) else np.asarray(x, dtype=np.float64).ravel()
    if vec.shape[0] != model.weights.shape[1]:
        raise ValueError(
            f"input has {vec.shape[0]} values, model expects {model.weights.shape[1]}"
        )
    return vec


def predict(model: ToyClassifier, x: FrameSequence | np.ndarray) -> tuple[int, np.ndarray]:
    """(label, score vector); ties break toward the lowest class index."""
    vec = _as_vector(model, x)
    scores = softmax(model.weights @ vec + model.bias)
    return int(np.argmax(scores)), scores


def cross_entropy_and_grads(
    model: ToyClassifier, xs: np.ndarray, ys: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy over a batch plus gradients w.r.t. weights and bias."""
    n = xs.shape[0]
    probs = softmax(xs @ model.weights.T + model.bias)
    loss = float(-np.mean(np.log(np.maximum(probs[np.arange(n), ys], 1e-300))))
    dlogits = probs
    dlogits[np.arange(n), ys] -= 1.0
    dlogits /= n
    return loss, dlogits.T @ xs, dlogits.sum(axis=0)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    lr: float = 0.05
    batch_size: int = 32
    seed: int = 0


def _pipeline_batch(
    samples: list[LabeledSequence],
    pipeline: PipelineSpec,
    schedule: ScheduleState,
    rng_seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    vecs = []
    ys = np.empty(len(samples), dtype=np.int64)
    for i, s in enumerate(samples):
        out = run_pipeline(s.seq, pipeline, "train", schedule=schedule, rng_seed=rng_seed)
        vecs.append(out.frames.ravel())
        ys[i] = s.label
    return np.stack(vecs), ys


def train_toy(
    data: list[LabeledSequence],
    pipeline: PipelineSpec,
    schedule: ScheduleState,
    config: TrainConfig = TrainConfig(),
    checkpoint_epochs: tuple[int, ...] = (),
    checkpoints_out: dict[int, ToyClassifier] | None = None,
) -> ToyClassifier:
    """Mini-batch SGD on cross-entropy over resampled pipeline outputs.

    Every sample goes through the pipeline in train mode each epoch, so the
    schedule's alpha stream is consumed one draw per sample.  Training is
    deterministic given (data, schedule seed, config seed).  Checkpoints
    for epochs listed in checkpoint_epochs are copied into checkpoints_out.
    """
    if not data:
        raise ValueError("train split is empty")
    frame_dim = int(np.prod(data[0].seq.frame_shape))
    num_classes = max(s.label for s in data) + 1
    model = zero_classifier(num_classes, pipeline.model_input_len, frame_dim)

    for epoch in range(config.epochs):
        order = np.random.default_rng(derive_key(config.seed, epoch)).permutation(len(data))
        epoch_seed = derive_key(config.seed, epoch, 1)
        losses = []
        for start in range(0, len(order), config.batch_size):
            batch = [data[i] for i in order[start : start + config.batch_size]]
            xs, ys = _pipeline_batch(batch, pipeline, schedule, epoch_seed)
            loss, gw, gb = cross_entropy_and_grads(model, xs, ys)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch + 1)
            model.weights -= config.lr * gw
            model.bias -= config.lr * gb
            losses.append(loss)
        model.loss_history.append(float(np.mean(losses)))
        if epoch + 1 in checkpoint_epochs and checkpoints_out is not None:
            checkpoints_out[epoch + 1] = ToyClassifier(
                model.weights.copy(), model.bias.copy(), model.input_len,
                trained_config=format_schedule(schedule),
                loss_history=list(model.loss_history),
            )

    model.trained_config = format_schedule(schedule)
    return model


def gradient_check(
    model: ToyClassifier,
    xs: np.ndarray,
    ys: np.ndarray,
    num_coords: int = 64,
    h: float = 1e-5,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Checks num_coords randomly chosen weight/bias coordinates; the relative
    error uses |a| + |n| in the denominator so near-zero pairs stay tame.
    """
    if xs.shape[0] == 0:
        raise ValueError("batch is empty")
    _, gw, gb = cross_entropy_and_grads(model, xs, ys)
    analytic = np.concatenate([gw.ravel(), gb])

    def loss_at(params: np.ndarray) -> float:
        w = params[: model.weights.size].reshape(model.weights.shape)
        b = params[model.weights.size :]
        probe = ToyClassifier(w, b, model.input_len)
        loss, _, _ = cross_entropy_and_grads(probe, xs, ys)
        return loss

    params = np.concatenate([model.weights.ravel(), model.bias]).copy()
    rng = np.random.default_rng(seed)
    coords = rng.choice(params.size, size=min(num_coords, params.size), replace=False)
    worst = 0.0
    for c in coords:
        saved = params[c]
        params[c] = saved + h
        up = loss_at(params)
        params[c] = saved - h
        down = loss_at(params)
        params[c] = saved
        numeric = (up - down) / (2.0 * h)
        rel = abs(analytic[c] - numeric) / max(1e-8, abs(analytic[c]) + abs(numeric))
        worst = max(worst, rel)
    return worst
