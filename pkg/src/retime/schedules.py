"""Resampling-factor schedules for training.

Three kinds of alpha stream are supported, selected by descriptor strings
like "cvr:0.8", "rr:seed=42", or "sr:seed=7,mode=normalized":

* constant (cvr): a fixed alpha for every video.
* random (rr): alpha ~ U(lo, hi) per video, drawn counter-based from
  (seed, v_n) so any worker can reproduce draw k without shared state.
* sinusoidal (sr): alpha follows a sine of the cumulative video counter
  v_n (in radians), which concentrates draws near both ends of [lo, hi].

The sinusoidal formula alpha = lo + (hi-lo)*sin(v_n) would leave the
stated range whenever sin is negative, so the default "normalized" mode
remaps the sine to span [lo, hi] exactly: alpha = lo + (hi-lo)*(sin+1)/2.
The "literal-clamped" mode keeps the raw formula and clamps instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .rand import uniform_at, uniform_block

KINDS = ("constant", "random", "sinusoidal")
SR_MODES = ("normalized", "literal-clamped")
DEFAULT_LO = 0.2
DEFAULT_HI = 3.0


@dataclass
class ScheduleState:
    kind: str
    alpha_const: float = 1.0
    lo: float = DEFAULT_LO
    hi: float = DEFAULT_HI
    seed: int = 0
    v_n: int = 0
    sr_mode: str = "normalized"

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.sr_mode not in SR_MODES:
            raise ValueError(f"sr_mode must be one of {SR_MODES}, got {self.sr_mode!r}")
        if not 0 < self.lo < self.hi:
            raise ValueError(f"need 0 < lo < hi, got lo={self.lo}, hi={self.hi}")
        if self.kind == "constant" and not self.alpha_const > 0:
            raise ValueError(f"alpha_const must be > 0, got {self.alpha_const}")
        if self.v_n < 0:
            raise ValueError(f"v_n must be non-negative, got {self.v_n}")

    def copy(self) -> "ScheduleState":
        return replace(self)


def draw_at(state: ScheduleState, k: int) -> float:
    """The alpha that `state` emits at counter value k.  Pure."""
    if state.kind == "constant":
        return state.alpha_const
    if state.kind == "random":
        return state.lo + (state.hi - state.lo) * uniform_at(state.seed, k)
    # sinusoidal: the counter itself is the phase, in radians
    s = math.sin(k)
    if state.sr_mode == "normalized":
        return state.lo + (state.hi - state.lo) * (s + 1.0) / 2.0
    return min(max(state.lo + (state.hi - state.lo) * s, state.lo), state.hi)


def next_alpha(state: ScheduleState) -> float:
    """Emit the alpha for the current video counter and advance it."""
    alpha = draw_at(state, state.v_n)
    state.v_n += 1
    return alpha


def draw_block(state: ScheduleState, count: int) -> np.ndarray:
    """The next `count` draws of `state`, without mutating it."""
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    if state.kind == "constant":
        return np.full(count, state.alpha_const, dtype=np.float64)
    if state.kind == "random":
        u = uniform_block(state.seed, state.v_n, count)
        return state.lo + (state.hi - state.lo) * u
    s = np.sin(np.arange(state.v_n, state.v_n + count, dtype=np.float64))
    if state.sr_mode == "normalized":
        return state.lo + (state.hi - state.lo) * (s + 1.0) / 2.0
    return np.clip(state.lo + (state.hi - state.lo) * s, state.lo, state.hi)


def alpha_histogram(state: ScheduleState, draws: int, bins: int) -> np.ndarray:
    """Counts of the next `draws` emissions over `bins` equal-width bins.

    Bins span [lo, hi] and every emission lands in one of them, so the
    counts sum to `draws`.  The input state is not mutated.
    """
    if draws < 1:
        raise ValueError(f"draws must be >= 1, got {draws}")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    values = draw_block(state, draws)
    edges = np.linspace(state.lo, state.hi, bins + 1)
    counts, _ = np.histogram(values, bins=edges)
    return counts.astype(np.int64)


def parse_schedule(descriptor: str) -> ScheduleState:
    """Build a ScheduleState from a run-config string.

    Formats: "cvr:<alpha>", "rr:seed=<int>[,lo=..,hi=..]",
    "sr:seed=<int>[,mode=normalized|literal-clamped][,lo=..,hi=..]".
    """
    head, _, tail = descriptor.strip().partition(":")
    head = head.lower()
    if head == "cvr":
        try:
            alpha = float(tail)
        except ValueError:
            raise ValueError(f"cvr descriptor needs a numeric alpha, got {descriptor!r}")
        return ScheduleState(kind="constant", alpha_const=alpha)
    if head not in ("rr", "sr"):
        raise ValueError(f"unknown schedule kind in {descriptor!r} (want cvr, rr, or sr)")

    opts: dict[str, str] = {}
    if tail:
        for part in tail.split(","):
            key, sep, value = part.partition("=")
            if not sep:
                raise ValueError(f"bad schedule option {part!r} in {descriptor!r}")
            opts[key.strip()] = value.strip()
    known = {"seed", "mode", "lo", "hi"}
    unknown = set(opts) - known
    if unknown:
        raise ValueError(f"unknown schedule options {sorted(unknown)} in {descriptor!r}")

    kwargs = {
        "kind": "random" if head == "rr" else "sinusoidal",
        "seed": int(opts.get("seed", "0")),
        "lo": float(opts.get("lo", DEFAULT_LO)),
        "hi": float(opts.get("hi", DEFAULT_HI)),
    }
    if head == "sr":
        kwargs["sr_mode"] = opts.get("mode", "normalized")
    elif "mode" in opts:
        raise ValueError(f"mode= only applies to sr schedules, got {descriptor!r}")
    return ScheduleState(**kwargs)


def format_schedule(state: ScheduleState) -> str:
    """Descriptor string that parse_schedule maps back to this state."""
    if state.kind == "constant":
        return f"cvr:{state.alpha_const:g}"
    parts = [f"seed={state.seed}"]
    if state.kind == "sinusoidal":
        parts.append(f"mode={state.sr_mode}")
    if state.lo != DEFAULT_LO:
        parts.append(f"lo={state.lo:g}")
    if state.hi != DEFAULT_HI:
        parts.append(f"hi={state.hi:g}")
    head = "rr" if state.kind == "random" else "sr"
    return f"{head}:{','.join(parts)}"
