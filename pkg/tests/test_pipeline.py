import numpy as np
import pytest

from retime.frames import FrameSequence
from retime.pipeline import (
    CenterCrop,
    ClipExtract,
    HorizontalFlipRandom,
    PipelineSpec,
    RescaleRange,
    ResizeMinSide,
    SegmentSample,
    SubtractMeanBlock,
    SubtractMeanRGB,
    format_pipeline_config,
    parse_pipeline_config,
    preset,
    run_pipeline,
    segment_sample,
)
from retime.schedules import ScheduleState

from conftest import random_sequence


def rgb_sequence(rng, n=40, h=130, w=170):
    return FrameSequence("rgb", rng.uniform(0, 255, size=(n, h, w, 3)))


class TestPresets:
    def test_c3d_structure(self):
        spec = preset("c3d")
        assert spec.stages[0] == ClipExtract(50, "random")
        assert spec.stages[1] == ResizeMinSide(112)
        assert spec.stages[2] == CenterCrop(112, 112)
        assert isinstance(spec.stages[3], SubtractMeanBlock)
        assert spec.model_input_len == 16

    def test_i3d_structure(self):
        spec = preset("i3d")
        assert spec.stages[0] == ClipExtract(250, "random")
        assert spec.stages[1] == ResizeMinSide(256)
        assert spec.stages[2] == CenterCrop(224, 224)
        assert spec.stages[3] == RescaleRange(-1.0, 1.0)
        assert spec.model_input_len == 64

    def test_tsn_structure(self):
        spec = preset("tsn")
        assert spec.stages[0] == SegmentSample(3, 60)
        assert spec.stages[-1] == SubtractMeanRGB(123.0, 117.0, 104.0)
        assert spec.model_input_len == 3

    def test_resnet50_lstm_structure(self):
        spec = preset("resnet50_lstm")
        assert spec.stages[-1] == SubtractMeanRGB(123.68, 116.78, 103.94)
        assert spec.model_input_len == 250

    def test_toy_structure(self):
        spec = preset("toy")
        assert spec.stages == [ClipExtract(32, "random")]
        assert spec.model_input_len == 16

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError):
            preset("vgg")

    @pytest.mark.parametrize("name", ["c3d", "i3d", "tsn", "resnet50_lstm", "toy"])
    def test_config_round_trip(self, name):
        spec = preset(name)
        assert parse_pipeline_config(format_pipeline_config(spec)) == spec


class TestSpecValidation:
    def test_two_clip_stages_rejected(self):
        with pytest.raises(ValueError):
            PipelineSpec("bad", [ClipExtract(8), ClipExtract(4)], 4)

    def test_segment_divisibility(self):
        with pytest.raises(ValueError):
            PipelineSpec("bad", [SegmentSample(3, 10)], 4)


class TestStages:
    def test_mean_rgb_subtraction(self, rng):
        frames = np.full((2, 1, 1, 3), [200.0, 150.0, 100.0])
        seq = FrameSequence("px", frames)
        spec = PipelineSpec("m", [SubtractMeanRGB(123.0, 117.0, 104.0)], 2)
        out = run_pipeline(seq, spec, "test")
        np.testing.assert_array_equal(out.frames[0, 0, 0], [77.0, 33.0, -4.0])

    def test_rescale_range_endpoints(self):
        frames = np.zeros((1, 1, 2, 1))
        frames[0, 0, 1, 0] = 255.0
        seq = FrameSequence("r", frames)
        spec = PipelineSpec("m", [RescaleRange(-1.0, 1.0)], 1)
        out = run_pipeline(seq, spec, "test")
        assert out.frames[0, 0, 0, 0] == -1.0
        assert out.frames[0, 0, 1, 0] == 1.0

    def test_center_crop_origin(self, rng):
        seq = rgb_sequence(rng, n=3, h=10, w=13)
        spec = PipelineSpec("m", [CenterCrop(4, 5)], 3)
        out = run_pipeline(seq, spec, "test")
        np.testing.assert_array_equal(out.frames, seq.frames[:, 3:7, 4:9, :])

    def test_crop_larger_than_frame_rejected(self, rng):
        seq = rgb_sequence(rng, n=2, h=10, w=10)
        spec = PipelineSpec("m", [CenterCrop(30, 30)], 2)
        with pytest.raises(ValueError):
            run_pipeline(seq, spec, "test")

    def test_resize_min_side_and_aspect(self, rng):
        seq = rgb_sequence(rng, n=2, h=120, w=160)
        spec = PipelineSpec("m", [ResizeMinSide(112)], 2)
        out = run_pipeline(seq, spec, "test")
        h, w, _ = out.frame_shape
        assert min(h, w) == 112
        assert abs(w / h - 160 / 120) <= 1.0 / min(h, w)

    def test_resize_same_size_is_noop(self, rng):
        seq = rgb_sequence(rng, n=2, h=50, w=64)
        spec = PipelineSpec("m", [ResizeMinSide(50)], 2)
        out = run_pipeline(seq, spec, "test")
        np.testing.assert_array_equal(out.frames, seq.frames)

    def test_mean_block_cyclic(self, tmp_path, rng):
        block = np.zeros((4, 2, 2, 1))
        for t in range(4):
            block[t] = t + 1
        path = tmp_path / "mean.npy"
        np.save(path, block)
        frames = np.full((6, 2, 2, 1), 10.0)
        seq = FrameSequence("blk", frames)
        spec = PipelineSpec("m", [SubtractMeanBlock(str(path))], 6)
        out = run_pipeline(seq, spec, "test")
        got = out.frames[:, 0, 0, 0]
        np.testing.assert_array_equal(got, [9.0, 8.0, 7.0, 6.0, 9.0, 8.0])

    def test_mean_block_default_is_noop(self, rng):
        seq = rgb_sequence(rng, n=4, h=3, w=3)
        spec = PipelineSpec("m", [SubtractMeanBlock()], 4)
        out = run_pipeline(seq, spec, "test")
        np.testing.assert_array_equal(out.frames, seq.frames)


class TestClipExtract:
    def test_short_input_loops_first(self, rng):
        seq = random_sequence(rng, n=5, seq_id="short")
        spec = PipelineSpec("m", [ClipExtract(12, 0)], 12)
        out = run_pipeline(seq, spec, "test")
        assert len(out) == 12
        np.testing.assert_array_equal(out.frames[:5], seq.frames)
        np.testing.assert_array_equal(out.frames[5:10], seq.frames)

    def test_fixed_offset(self, rng):
        seq = random_sequence(rng, n=20, seq_id="fx")
        spec = PipelineSpec("m", [ClipExtract(8, 5)], 8)
        out = run_pipeline(seq, spec, "test")
        np.testing.assert_array_equal(out.frames, seq.frames[5:13])

    def test_test_mode_random_offset_is_anchored_at_start(self, rng):
        seq = random_sequence(rng, n=20, seq_id="ctr")
        spec = PipelineSpec("m", [ClipExtract(8, "random")], 8)
        out = run_pipeline(seq, spec, "test")
        np.testing.assert_array_equal(out.frames, seq.frames[:8])

    def test_train_offset_keyed_on_seed_and_id(self, rng):
        sched = ScheduleState(kind="constant", alpha_const=1.0)
        seq = random_sequence(rng, n=30, seq_id="k1")
        spec = PipelineSpec("m", [ClipExtract(8, "random")], 8)
        a = run_pipeline(seq, spec, "train", schedule=sched, rng_seed=1)
        b = run_pipeline(seq, spec, "train", schedule=sched, rng_seed=1)
        c = run_pipeline(seq, spec, "train", schedule=sched, rng_seed=2)
        np.testing.assert_array_equal(a.frames, b.frames)
        assert not np.array_equal(a.frames, c.frames)


class TestFlip:
    def test_flip_applies_to_all_frames_together(self, rng):
        seq = rgb_sequence(rng, n=6, h=4, w=7)
        spec = PipelineSpec("m", [HorizontalFlipRandom(p=1.0)], 6)
        sched = ScheduleState(kind="constant", alpha_const=1.0)
        out = run_pipeline(seq, spec, "train", schedule=sched, rng_seed=0)
        np.testing.assert_array_equal(out.frames, seq.frames[:, :, ::-1, :])

    def test_flip_disabled_in_test_mode(self, rng):
        seq = rgb_sequence(rng, n=6, h=4, w=7)
        spec = PipelineSpec("m", [HorizontalFlipRandom(p=1.0)], 6)
        out = run_pipeline(seq, spec, "test")
        np.testing.assert_array_equal(out.frames, seq.frames)

    def test_flip_rate_roughly_half(self, rng):
        spec = PipelineSpec("m", [HorizontalFlipRandom()], 3)
        sched = ScheduleState(kind="constant", alpha_const=1.0)
        flips = 0
        for k in range(200):
            seq = FrameSequence(f"s{k}", np.arange(9, dtype=float).reshape(3, 1, 3, 1))
            out = run_pipeline(seq, spec, "train", schedule=sched, rng_seed=0)
            flips += not np.array_equal(out.frames, seq.frames)
        assert 60 <= flips <= 140


class TestSegmentSample:
    def test_already_at_target(self, rng):
        seq = random_sequence(rng, n=180, h=1, w=1, c=1)
        out = segment_sample(seq, 3, 60)
        np.testing.assert_array_equal(out.frames, seq.frames)

    def test_even_subsampling(self):
        frames = np.arange(360, dtype=float).reshape(360, 1, 1, 1)
        seq = FrameSequence("s", frames)
        out = segment_sample(seq, 3, 60)
        np.testing.assert_array_equal(out.frames[:, 0, 0, 0], np.arange(0, 360, 2))

    def test_short_input_loops(self):
        frames = np.arange(90, dtype=float).reshape(90, 1, 1, 1)
        seq = FrameSequence("s", frames)
        out = segment_sample(seq, 3, 60)
        assert len(out) == 180
        np.testing.assert_array_equal(out.frames[:90], seq.frames)
        np.testing.assert_array_equal(out.frames[90:], seq.frames)


class TestRunPipeline:
    def test_toy_train_alpha_one_takes_clip_prefix(self, rng):
        seq = random_sequence(rng, n=40, h=1, w=32, c=1, seq_id="toy0")
        spec = preset("toy")
        sched = ScheduleState(kind="constant", alpha_const=1.0)
        out = run_pipeline(seq, spec, "train", schedule=sched, rng_seed=3)
        assert len(out) == 16
        # output must be a contiguous 16-frame window of the input
        starts = [
            o for o in range(40 - 16 + 1)
            if np.array_equal(out.frames, seq.frames[o : o + 16])
        ]
        assert len(starts) == 1

    def test_c3d_test_output_shape(self, rng):
        seq = rgb_sequence(rng, n=60, h=130, w=170)
        out = run_pipeline(seq, preset("c3d"), "test", input_alpha=1.0)
        assert out.frames.shape == (16, 112, 112, 3)

    def test_tsn_picks_one_frame_per_segment(self):
        frames = np.arange(180, dtype=float).reshape(180, 1, 1, 1)
        seq = FrameSequence("t", frames)
        spec = PipelineSpec("m", [SegmentSample(3, 60)], 3)
        out = run_pipeline(seq, spec, "test")
        # alpha = 1 picks the first frame of each 60-frame segment
        np.testing.assert_array_equal(out.frames[:, 0, 0, 0], [0.0, 60.0, 120.0])

    def test_output_length_always_matches_spec(self, rng):
        spec = preset("toy")
        sched = ScheduleState(kind="random", seed=11)
        for k in range(10):
            seq = random_sequence(rng, n=int(rng.integers(3, 80)), h=1, w=32, c=1,
                                  seq_id=f"v{k}")
            out = run_pipeline(seq, spec, "train", schedule=sched, rng_seed=0)
            assert len(out) == spec.model_input_len

    def test_train_draws_from_schedule(self, rng):
        seq = random_sequence(rng, n=40, h=1, w=32, c=1)
        sched = ScheduleState(kind="random", seed=5)
        run_pipeline(seq, preset("toy"), "train", schedule=sched, rng_seed=0)
        assert sched.v_n == 1

    def test_test_mode_ignores_dynamic_schedule(self, rng):
        seq = random_sequence(rng, n=40, h=1, w=32, c=1)
        sched = ScheduleState(kind="random", seed=5)
        a = run_pipeline(seq, preset("toy"), "test", schedule=sched)
        b = run_pipeline(seq, preset("toy"), "test", schedule=None)
        assert sched.v_n == 0
        np.testing.assert_array_equal(a.frames, b.frames)

    def test_test_mode_constant_schedule_keeps_its_alpha(self, rng):
        seq = random_sequence(rng, n=40, h=1, w=32, c=1)
        spec = preset("toy")
        cvr08 = ScheduleState(kind="constant", alpha_const=0.8)
        out = run_pipeline(seq, spec, "test", schedule=cvr08)
        assert out.id.endswith("@α=0.8")

    def test_test_mode_is_repeatable(self, rng):
        seq = rgb_sequence(rng, n=45, h=60, w=80)
        spec = PipelineSpec(
            "m",
            [ClipExtract(20, "random"), ResizeMinSide(32), CenterCrop(28, 28),
             HorizontalFlipRandom()],
            8,
        )
        a = run_pipeline(seq, spec, "test", input_alpha=1.0)
        b = run_pipeline(seq, spec, "test", input_alpha=1.0)
        np.testing.assert_array_equal(a.frames, b.frames)

    def test_input_alpha_block_resamples_in_test_mode(self, rng):
        frames = np.arange(40, dtype=float).reshape(40, 1, 1, 1)
        seq = FrameSequence("ia", frames)
        spec = PipelineSpec("m", [], 10)
        out = run_pipeline(seq, spec, "test", input_alpha=2.0)
        # 40 -> 20 frames (every 2nd), then alpha=1 keeps the first 10
        np.testing.assert_array_equal(
            out.frames[:, 0, 0, 0], [1, 3, 5, 7, 9, 11, 13, 15, 17, 19]
        )

    def test_train_mode_requires_schedule(self, rng):
        seq = random_sequence(rng, n=10)
        with pytest.raises(ValueError):
            run_pipeline(seq, preset("toy"), "train", schedule=None)

    def test_invalid_input_alpha(self, rng):
        seq = random_sequence(rng, n=10)
        with pytest.raises(ValueError):
            run_pipeline(seq, preset("toy"), "test", input_alpha=0.0)
