import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from retime.frames import FrameSequence, loop_to_min_length
from retime.resample import (
    apply_index_plan,
    compute_index_plan,
    interpolate_at,
    resample_by_rate_indexed,
    resample_by_rate_interpolated,
)

from conftest import random_sequence


def index_oracle(n, l, alpha):
    """Independent brute-force evaluation of the floor-and-clamp rule."""
    out = []
    for i in range(1, l + 1):
        v = math.floor(alpha * i)
        if v < 1:
            v = 1
        elif v >= n:
            v = n
        out.append(v)
    return out


def blend_oracle(frames, t):
    """Per-pixel convex combination, written long-hand."""
    n = len(frames)
    t = min(max(t, 1.0), float(n))
    f = math.floor(t)
    w = t - f
    if f >= n:
        return frames[n - 1].copy()
    a, b = frames[f - 1], frames[f]
    out = np.empty_like(a)
    for idx in np.ndindex(a.shape):
        out[idx] = (1.0 - w) * a[idx] + w * b[idx]
    return out


class TestComputeIndexPlan:
    @pytest.mark.parametrize(
        "n,l,alpha,expected",
        [
            (10, 5, 1.0, [1, 2, 3, 4, 5]),
            (10, 5, 2.0, [2, 4, 6, 8, 10]),
            (5, 4, 3.0, [3, 5, 5, 5]),
            (10, 6, 0.5, [1, 1, 1, 2, 2, 3]),
        ],
    )
    def test_known_plans(self, n, l, alpha, expected):
        plan = compute_index_plan(n, l, alpha)
        assert plan.indices.tolist() == expected
        assert (plan.source_len, plan.target_len, plan.alpha) == (n, l, alpha)

    def test_matches_oracle_exhaustively(self):
        alphas = [k / 5 for k in range(1, 16)]
        for n in range(1, 21):
            for l in range(1, 21):
                for alpha in alphas:
                    got = compute_index_plan(n, l, alpha).indices.tolist()
                    assert got == index_oracle(n, l, alpha), (n, l, alpha)

    @pytest.mark.parametrize("n,l,alpha", [(0, 5, 1.0), (5, 0, 1.0), (5, 5, 0.0), (5, 5, -1.0)])
    def test_rejects_bad_arguments(self, n, l, alpha):
        with pytest.raises(ValueError):
            compute_index_plan(n, l, alpha)

    @given(
        n=st.integers(1, 200),
        l=st.integers(1, 200),
        alpha=st.floats(0.01, 50.0, allow_nan=False),
    )
    @settings(max_examples=200)
    def test_indices_monotone_and_in_range(self, n, l, alpha):
        idx = compute_index_plan(n, l, alpha).indices
        assert np.all(idx[1:] >= idx[:-1])
        assert idx.min() >= 1 and idx.max() <= n

    @given(n=st.integers(1, 100), l=st.integers(1, 100))
    @settings(max_examples=100)
    def test_unit_alpha_is_identity_prefix(self, n, l):
        if l <= n:
            assert compute_index_plan(n, l, 1.0).indices.tolist() == list(range(1, l + 1))


class TestApplyIndexPlan:
    def test_prefix_pick(self, rng):
        seq = random_sequence(rng, n=10)
        out = apply_index_plan(seq, compute_index_plan(10, 5, 1.0))
        assert len(out) == 5
        np.testing.assert_array_equal(out.frames, seq.frames[:5])
        assert out.id == "seq@α=1"

    def test_repeated_tail(self, rng):
        seq = random_sequence(rng, n=5)
        out = apply_index_plan(seq, compute_index_plan(5, 4, 3.0))
        expected = seq.frames[[2, 4, 4, 4]]
        np.testing.assert_array_equal(out.frames, expected)

    def test_single_frame_plan(self, rng):
        seq = random_sequence(rng, n=7)
        out = apply_index_plan(seq, compute_index_plan(7, 1, 1.0))
        assert len(out) == 1
        np.testing.assert_array_equal(out.frames[0], seq.frames[0])

    def test_length_mismatch_rejected(self, rng):
        seq = random_sequence(rng, n=9)
        with pytest.raises(ValueError):
            apply_index_plan(seq, compute_index_plan(10, 5, 1.0))


class TestResampleByRateIndexed:
    def test_identity(self, rng):
        seq = random_sequence(rng, n=10)
        out = resample_by_rate_indexed(seq, 1.0)
        np.testing.assert_array_equal(out.frames, seq.frames)

    def test_speed_up(self, rng):
        seq = random_sequence(rng, n=10)
        out = resample_by_rate_indexed(seq, 2.0)
        np.testing.assert_array_equal(out.frames, seq.frames[[1, 3, 5, 7, 9]])

    def test_slow_down(self, rng):
        seq = random_sequence(rng, n=10)
        out = resample_by_rate_indexed(seq, 0.5)
        expected_idx = [1, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7, 8, 8, 9, 9, 10]
        assert len(out) == 20
        np.testing.assert_array_equal(out.frames, seq.frames[np.array(expected_idx) - 1])

    def test_extreme_alpha_still_yields_one_frame(self, rng):
        seq = random_sequence(rng, n=4)
        out = resample_by_rate_indexed(seq, 100.0)
        assert len(out) == 1
        np.testing.assert_array_equal(out.frames[0], seq.frames[-1])


class TestInterpolateAt:
    def test_constant_frames(self):
        seq = FrameSequence("c", np.full((4, 2, 2, 1), 7.5))
        for t in (1.0, 1.3, 2.999, 4.0, 9.0):
            np.testing.assert_array_equal(interpolate_at(seq, t), np.full((2, 2, 1), 7.5))

    def test_integer_t_is_exact_copy(self, rng):
        seq = random_sequence(rng, n=6)
        np.testing.assert_array_equal(interpolate_at(seq, 2.0), seq.frames[1])

    def test_quarter_blend(self):
        frames = np.stack([np.zeros((1, 3, 1)), np.full((1, 3, 1), 10.0)])
        seq = FrameSequence("b", frames)
        np.testing.assert_allclose(interpolate_at(seq, 1.25), np.full((1, 3, 1), 2.5))

    def test_matches_pixel_oracle(self, rng):
        for _ in range(60):
            seq = random_sequence(rng, h=3, w=3, c=2)
            t = float(rng.uniform(0.0, len(seq) + 1.0))
            got = interpolate_at(seq, t)
            np.testing.assert_allclose(got, blend_oracle(seq.frames, t), atol=1e-12, rtol=0)

    def test_output_within_bracketing_frames(self, rng):
        seq = random_sequence(rng, n=8)
        for t in rng.uniform(1.0, 8.0, size=25):
            f = min(math.floor(t), 7)
            lo = np.minimum(seq.frames[f - 1], seq.frames[f])
            hi = np.maximum(seq.frames[f - 1], seq.frames[f])
            out = interpolate_at(seq, float(t))
            assert np.all(out >= lo - 1e-12) and np.all(out <= hi + 1e-12)


class TestResampleByRateInterpolated:
    def test_identity_is_bit_exact(self, rng):
        seq = random_sequence(rng, n=13)
        out = resample_by_rate_interpolated(seq, 1.0)
        assert np.array_equal(out.frames, seq.frames)

    def test_integer_positions_no_blending(self, rng):
        seq = random_sequence(rng, n=10)
        out = resample_by_rate_interpolated(seq, 2.0)
        np.testing.assert_array_equal(out.frames, seq.frames[[0, 2, 4, 6, 8]])

    def test_slow_down_blends_midpoints(self, rng):
        seq = random_sequence(rng, n=3)
        out = resample_by_rate_interpolated(seq, 0.5)
        assert len(out) == 6
        np.testing.assert_array_equal(out.frames[0], seq.frames[0])
        np.testing.assert_allclose(
            out.frames[1], (seq.frames[0] + seq.frames[1]) / 2.0, atol=1e-12
        )
        np.testing.assert_array_equal(out.frames[2], seq.frames[1])
        # positions past the end clamp to the last frame
        np.testing.assert_array_equal(out.frames[4], seq.frames[2])
        np.testing.assert_array_equal(out.frames[5], seq.frames[2])

    def test_length_rounds_half_up(self, rng):
        seq = random_sequence(rng, n=5)
        assert len(resample_by_rate_interpolated(seq, 2.0)) == 3  # round(2.5) -> 3

    def test_rejects_nonpositive_rate(self, rng):
        with pytest.raises(ValueError):
            resample_by_rate_interpolated(random_sequence(rng), 0.0)


class TestLoopToMinLength:
    def test_long_enough_unchanged(self, rng):
        seq = random_sequence(rng, n=60)
        assert loop_to_min_length(seq, 50) is seq

    def test_wrap_around(self):
        frames = np.arange(3, dtype=float).reshape(3, 1, 1, 1)
        seq = FrameSequence("abc", frames)
        out = loop_to_min_length(seq, 7)
        assert out.frames[:, 0, 0, 0].tolist() == [0, 1, 2, 0, 1, 2, 0]

    def test_single_frame(self):
        seq = FrameSequence("one", np.ones((1, 2, 2, 1)))
        out = loop_to_min_length(seq, 4)
        assert len(out) == 4
        np.testing.assert_array_equal(out.frames, np.ones((4, 2, 2, 1)))

    @given(n=st.integers(1, 40), min_len=st.integers(1, 120))
    @settings(max_examples=60)
    def test_length_and_prefix_properties(self, n, min_len):
        frames = np.arange(n, dtype=float).reshape(n, 1, 1, 1)
        seq = FrameSequence("p", frames)
        out = loop_to_min_length(seq, min_len)
        assert len(out) == max(n, min_len)
        np.testing.assert_array_equal(out.frames[:n], seq.frames)
