import numpy as np
import pytest
from helpers import brute_force_decode_span, localizer_fixture

from vlf.errors import ConfigError, InputError, IntegrityError
from vlf.kernel import ParamSet, fd_gradcheck, softmax_xent
from vlf.localize import (
    FrameFeatureTrack,
    LocalizerExample,
    MeanPoolVisionEncoder,
    SpanLocalizer,
    align_frames,
    decode_span,
    fuse_vision,
    fuse_vision_vjp,
    gold_packed_positions,
    init_fusion_params,
    load_track,
    pack_input,
    save_track,
    span_logits,
    span_to_timestamps,
    train_rc,
    vision_encode,
)
from vlf.seeding import rng
from vlf.subtitles import Cue, TimeSpan, build_word_timeline


def simple_timeline(n_words=10, seconds_per_word=1.0):
    text = " ".join(f"w{i}" for i in range(n_words))
    return build_word_timeline([Cue(text, TimeSpan(0, n_words * seconds_per_word))])


class TestPackInput:
    def test_length_bookkeeping(self):
        packed = pack_input(["q"] * 5, simple_timeline(10), max_len=100)
        assert len(packed) == 16
        assert packed.word_map[:6] == [-1] * 6
        assert packed.word_map[6:] == list(range(10))

    def test_subtitle_tail_truncated(self):
        packed = pack_input(["q"] * 5, simple_timeline(50), max_len=20)
        assert len(packed) == 20
        assert packed.word_map[-1] == 13

    def test_word_map_round_trip(self):
        timeline = simple_timeline(8)
        packed = pack_input(["a", "b"], timeline, max_len=100)
        for p, w in enumerate(packed.word_map):
            if w >= 0:
                assert packed.tokens[p] == timeline.words[w]

    def test_oversized_question_rejected(self):
        with pytest.raises(InputError):
            pack_input(["q"] * 30, simple_timeline(5), max_len=20)

    def test_empty_question_rejected(self):
        with pytest.raises(InputError):
            pack_input([], simple_timeline(5))


class TestDecodeSpan:
    def test_peaked_pair(self):
        start = np.full(10, -5.0)
        end = np.full(10, -5.0)
        start[3] = 4.0
        end[7] = 4.0
        assert decode_span(start, end) == (3, 7)

    def test_constrained_when_peaks_cross(self):
        gen = rng(0, "spans")
        for _ in range(30):
            n = int(gen.integers(1, 65))
            start = gen.normal(size=n)
            end = gen.normal(size=n)
            max_span = int(gen.integers(1, 20))
            i, j = decode_span(start, end, max_span)
            assert i <= j < i + max_span
            assert (i, j) == brute_force_decode_span(start, end, max_span)

    def test_single_position(self):
        assert decode_span(np.array([1.0]), np.array([1.0])) == (0, 0)

    def test_ties_prefer_smallest_indices(self):
        start = np.zeros(5)
        end = np.zeros(5)
        assert decode_span(start, end) == (0, 0)


class TestSpanToTimestamps:
    def _setup(self):
        cues = [Cue("a b", TimeSpan(1, 3)), Cue("c d", TimeSpan(8, 10)), Cue("e", TimeSpan(4, 9))]
        cues.sort(key=lambda c: c.span.start_s)
        timeline = build_word_timeline(cues)
        packed = pack_input(["q"], timeline, max_len=50)
        return timeline, packed

    def test_single_word_takes_cue_span(self):
        timeline = build_word_timeline([Cue("x y z", TimeSpan(4, 9))])
        packed = pack_input(["q"], timeline)
        p = packed.position_of_word(1)
        assert span_to_timestamps(p, p, packed, timeline) == TimeSpan(4, 9)

    def test_envelope_across_cues(self):
        cues = [Cue("a b", TimeSpan(1, 3)), Cue("c d", TimeSpan(8, 10))]
        timeline = build_word_timeline(cues)
        packed = pack_input(["q"], timeline)
        i = packed.position_of_word(0)
        j = packed.position_of_word(3)
        assert span_to_timestamps(i, j, packed, timeline) == TimeSpan(1, 10)

    def test_question_position_rejected(self):
        timeline = simple_timeline(4)
        packed = pack_input(["q"], timeline)
        with pytest.raises(IntegrityError):
            span_to_timestamps(0, 2, packed, timeline)


class TestGoldPositions:
    def test_maps_into_packed_coordinates(self):
        timeline = simple_timeline(10)
        packed = pack_input(["q", "r"], timeline)
        gold = gold_packed_positions(TimeSpan(2.5, 4.5), packed, timeline)
        assert gold is not None
        i, j = gold
        assert packed.word_map[i] == 2
        assert packed.word_map[j] == 4

    def test_truncated_gold_is_none(self):
        timeline = simple_timeline(50)
        packed = pack_input(["q"], timeline, max_len=10)
        assert gold_packed_positions(TimeSpan(40, 45), packed, timeline) is None


class TestFrameFeatures:
    def _track(self, n=10, d=4, seed=0):
        gen = rng(seed, "track")
        return FrameFeatureTrack(
            gen.normal(size=(n, d)).astype(np.float32), float(n)
        )

    def test_single_second(self):
        track = self._track()
        np.testing.assert_allclose(
            align_frames(track, 2.0, 3.0), track.features[2].astype(np.float64)
        )

    def test_full_pooling(self):
        track = self._track()
        np.testing.assert_allclose(
            align_frames(track, 0.0, track.duration_s),
            track.features.astype(np.float64).mean(axis=0),
        )

    def test_fractional_window(self):
        track = self._track()
        np.testing.assert_allclose(
            align_frames(track, 1.5, 3.5),
            track.features[1:4].astype(np.float64).mean(axis=0),
        )

    def test_empty_range_clamps(self):
        track = self._track(n=5)
        np.testing.assert_allclose(
            align_frames(track, 2.0, 2.0), track.features[2].astype(np.float64)
        )
        np.testing.assert_allclose(
            align_frames(track, 99.0, 99.0), track.features[4].astype(np.float64)
        )

    def test_row_count_must_cover_duration(self):
        with pytest.raises(InputError):
            FrameFeatureTrack(np.zeros((3, 2), dtype=np.float32), 10.0)

    def test_file_round_trip_bit_identity(self, tmp_path):
        track = self._track(n=7, d=3, seed=2)
        a = tmp_path / "a.vftr"
        b = tmp_path / "b.vftr"
        save_track(track, a)
        save_track(load_track(a), b)
        assert a.read_bytes() == b.read_bytes()


class TestVisionEncoder:
    def test_single_frame_is_affine_of_frame(self):
        enc = MeanPoolVisionEncoder(4, seed=0)
        track = FrameFeatureTrack(
            rng(1, "vf").normal(size=(1, 4)).astype(np.float32), 1.0
        )
        expected = track.features[0].astype(np.float64) @ enc.params["w"] + enc.params["b"]
        np.testing.assert_allclose(vision_encode(track, enc), expected)

    def test_constant_track_equals_single_frame(self):
        enc = MeanPoolVisionEncoder(4, seed=0)
        row = rng(2, "vf").normal(size=4).astype(np.float32)
        one = FrameFeatureTrack(row[None, :], 1.0)
        many = FrameFeatureTrack(np.tile(row, (6, 1)), 6.0)
        np.testing.assert_allclose(
            vision_encode(track=many, encoder=enc),
            vision_encode(track=one, encoder=enc),
            atol=1e-12,
        )

    def test_gradcheck(self):
        enc = MeanPoolVisionEncoder(4, seed=3)
        track = FrameFeatureTrack(
            rng(3, "vf").normal(size=(5, 4)).astype(np.float32), 5.0
        )

        def loss_fn(params):
            out, bwd = enc.encode_vjp(track)
            bwd(2.0 * out)
            return float((out**2).sum())

        assert fd_gradcheck(loss_fn, enc.params, eps=1e-4) < 1e-5

    def test_width_mismatch_rejected(self):
        enc = MeanPoolVisionEncoder(4, seed=0)
        track = FrameFeatureTrack(np.zeros((2, 3), dtype=np.float32), 2.0)
        with pytest.raises(ConfigError):
            enc.encode(track)


class TestFuseVision:
    def test_dimensional_bookkeeping(self):
        params = ParamSet()
        init_fusion_params(params, 32, 16, rng(0, "fuse"))
        assert params["fuse.w"].shape == (48, 32)
        h = rng(1, "fuse").normal(size=(5, 32))
        v = rng(2, "fuse").normal(size=16)
        assert fuse_vision(h, v, params).shape == (5, 32)

    def test_zero_weights_give_zero_output(self):
        params = ParamSet()
        init_fusion_params(params, 8, 4, zero=True)
        h = rng(3, "fuse").normal(size=(3, 8))
        v = rng(4, "fuse").normal(size=4)
        assert np.array_equal(fuse_vision(h, v, params), np.zeros((3, 8)))

    def test_gradcheck(self):
        gen = rng(5, "fuse")
        params = ParamSet()
        init_fusion_params(params, 6, 3, gen)
        h = gen.normal(size=(4, 6))
        v = gen.normal(size=3)

        def loss_fn(p):
            out, bwd = fuse_vision_vjp(h, v, p)
            bwd(2.0 * out)
            return float((out**2).sum())

        assert fd_gradcheck(loss_fn, params, eps=1e-5) < 1e-4


class TestSpanModel:
    def test_zero_parameters_give_constant_logits(self):
        X, _ = localizer_fixture()
        loc = SpanLocalizer(dim=16, seed=0)
        loc._build()
        for name, value in loc.params_.items():
            if not name.endswith(("ln1.g", "ln2.g")):
                value[...] = 0.0
        packed = pack_input(X[0].question_tokens, X[0].timeline)
        start, end = span_logits(packed, loc)
        subtitle = [p for p, w in enumerate(packed.word_map) if w >= 0]
        assert np.allclose(start[subtitle], start[subtitle][0])
        i, j = decode_span(start, end)
        assert (i, j) == (subtitle[0], subtitle[0])

    def test_mask_excludes_question_positions(self):
        X, _ = localizer_fixture()
        for seed in range(5):
            loc = SpanLocalizer(dim=16, seed=seed)
            loc._build()
            packed = pack_input(X[0].question_tokens, X[0].timeline)
            start, end = span_logits(packed, loc)
            i, j = decode_span(start, end)
            assert packed.word_map[i] >= 0 and packed.word_map[j] >= 0

    def test_span_heads_gradcheck(self):
        loc = SpanLocalizer(dim=8, n_buckets=32, seed=0)
        loc._build()
        timeline = simple_timeline(6)
        packed = pack_input(["q", "r"], timeline)

        def loss_fn(params):
            start, end, bwd = loc._forward_vjp(packed, None, timeline)
            ls, ds = softmax_xent(start, 4)
            le, de = softmax_xent(end, 6)
            bwd(ds, de)
            return ls + le

        assert fd_gradcheck(loss_fn, loc.params_, eps=1e-5) < 1e-4


class TestTraining:
    def test_cycle_overfit_fixture(self):
        X, y = localizer_fixture()
        loc = SpanLocalizer(
            dim=24, qg_weight=1.0, epochs=120, batch_size=5, lr=5e-3, seed=0
        )
        loc.fit(X, y)
        assert loc.exact_match_rate(X, y) == 1.0
        assert loc.loss_trace_[-1] < loc.loss_trace_[0]
        assert loc.predict([X[0]])[0] == y[0]

    def test_plain_rc_trace_is_bit_identical(self):
        X, y = localizer_fixture()
        cfg = dict(dim=16, epochs=6, batch_size=2, lr=5e-3, seed=11)
        via_weight = SpanLocalizer(qg_weight=0.0, **cfg).fit(X, y)
        via_helper = train_rc(X, y, **cfg)
        assert via_weight.loss_trace_ == via_helper.loss_trace_

    def test_cycle_loss_dominates_span_loss_at_start(self):
        X, y = localizer_fixture()
        cfg = dict(dim=16, epochs=1, batch_size=5, lr=5e-3, seed=4)
        plain = SpanLocalizer(qg_weight=0.0, **cfg).fit(X, y)
        cycle = SpanLocalizer(qg_weight=1.0, **cfg).fit(X, y)
        assert cycle.loss_trace_[0] >= plain.loss_trace_[0]
        assert all(v >= 0.0 for v in cycle.loss_trace_)

    def test_skipped_items_warn(self):
        X, y = localizer_fixture()
        # A tiny packing budget truncates away the gold spans.
        loc = SpanLocalizer(dim=16, max_len=12, epochs=1, seed=0)
        with pytest.warns(RuntimeWarning, match="skipped"):
            with pytest.raises(ValueError):
                loc.fit(X, [TimeSpan(20, 22) for _ in y])

    def test_fusion_trains_and_predicts(self):
        X, y = localizer_fixture()
        gen = rng(6, "tracks")
        with_tracks = []
        for ex in X:
            duration = ex.timeline.spans[-1].end_s
            n = int(np.ceil(duration))
            track = FrameFeatureTrack(
                gen.normal(size=(n, 8)).astype(np.float32), duration
            )
            with_tracks.append(
                LocalizerExample(ex.question_tokens, ex.timeline, track=track)
            )
        loc = SpanLocalizer(
            dim=16, fusion=True, d_v=8, epochs=40, batch_size=5, lr=5e-3, seed=0
        )
        loc.fit(with_tracks, y)
        spans = loc.predict(with_tracks)
        assert all(isinstance(s, TimeSpan) for s in spans)
        assert loc.exact_match_rate(with_tracks, y) >= 0.8

    def test_per_word_fusion_mode(self):
        X, y = localizer_fixture()
        gen = rng(9, "pw")
        with_tracks = []
        for ex in X:
            duration = ex.timeline.spans[-1].end_s
            track = FrameFeatureTrack(
                gen.normal(size=(int(np.ceil(duration)), 8)).astype(np.float32),
                duration,
            )
            with_tracks.append(
                LocalizerExample(ex.question_tokens, ex.timeline, track=track)
            )
        loc = SpanLocalizer(
            dim=16,
            fusion=True,
            fusion_mode="per_word",
            d_v=8,
            epochs=30,
            batch_size=5,
            lr=5e-3,
            seed=0,
        )
        loc.fit(with_tracks, y)
        assert loc.exact_match_rate(with_tracks, y) >= 0.8

    def test_fusion_zero_init_preserves_logits(self):
        X, _ = localizer_fixture()
        duration = X[0].timeline.spans[-1].end_s
        track = FrameFeatureTrack(
            rng(7, "z").normal(size=(int(np.ceil(duration)), 8)).astype(np.float32),
            duration,
        )
        packed = pack_input(X[0].question_tokens, X[0].timeline)

        plain = SpanLocalizer(dim=16, seed=3)
        plain._build()
        fused = SpanLocalizer(dim=16, fusion=True, d_v=8, seed=3)
        fused._build(fusion_init_zero=True)
        fused.vision_encoder_.params["w"][...] = 0.0

        s0, e0 = span_logits(packed, plain)
        s1, e1 = span_logits(packed, fused, track=track)
        assert np.array_equal(s0, s1) and np.array_equal(e0, e1)

    def test_missing_track_with_fusion_rejected(self):
        X, y = localizer_fixture()
        loc = SpanLocalizer(dim=16, fusion=True, epochs=1, seed=0)
        with pytest.raises(InputError):
            loc.fit(X, y)

    def test_checkpoint_round_trip_identical_outputs(self, tmp_path):
        X, y = localizer_fixture()
        loc = SpanLocalizer(dim=16, epochs=10, batch_size=5, lr=5e-3, seed=0)
        loc.fit(X, y)
        loc.save(tmp_path / "loc.vlfk")
        clone = SpanLocalizer(dim=16, epochs=10, batch_size=5, lr=5e-3, seed=0)
        clone.load(tmp_path / "loc.vlfk")
        packed = pack_input(X[0].question_tokens, X[0].timeline)
        s0, e0 = span_logits(packed, loc)
        s1, e1 = span_logits(packed, clone)
        assert np.array_equal(s0, s1) and np.array_equal(e0, e1)
