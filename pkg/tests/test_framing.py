import itertools

import pytest
from oracles import dense_sampling_triplet, random_annotation

from tripletprobe.annotations import Segment, UtteranceAnnotation
from tripletprobe.errors import WindowOutOfRange
from tripletprobe.framing import (
    FrameKind,
    TripletLabel,
    classify_triplet,
    filter_frames,
    frames_to_tsv,
    label_utterance_frames,
    triplet_for_window,
    triplets_from_tsv,
)


def _ann(*segs):
    return UtteranceAnnotation("u", "s", tuple(Segment(*s) for s in segs))


class TestTripletForWindow:
    def test_window_inside_one_segment(self):
        ann = _ann(("a0", 0.0, 0.05), ("p", 0.05, 0.10))
        assert triplet_for_window(ann, 0.00, 0.02) == ("a0", "a0", "a0")

    def test_midpoint_on_boundary_uses_next_segment(self):
        ann = _ann(("a0", 0.0, 0.05), ("p", 0.05, 0.10))
        assert triplet_for_window(ann, 0.04, 0.06) == ("a0", "p", "p")

    def test_two_border_window(self):
        ann = _ann(("a", 0.0, 0.021), ("p", 0.021, 0.038), ("s", 0.038, 0.1))
        assert triplet_for_window(ann, 0.02, 0.04) == ("a", "p", "s")

    def test_out_of_range(self):
        ann = _ann(("a", 0.0, 0.05))
        with pytest.raises(WindowOutOfRange):
            triplet_for_window(ann, 0.04, 0.06)
        with pytest.raises(WindowOutOfRange):
            triplet_for_window(ann, 0.02, 0.02)

    def test_agrees_with_dense_sampling_oracle(self, rng):
        for _ in range(200):
            ann = random_annotation(rng)
            n = int(ann.end / 0.02 + 1e-9)
            for i in range(n):
                w0, w1 = i * 0.02, (i + 1) * 0.02
                assert triplet_for_window(ann, w0, w1) == dense_sampling_triplet(
                    ann, w0, w1
                )


class TestClassifyTriplet:
    @pytest.mark.parametrize(
        "triplet,kind",
        [
            (("a", "a", "a"), FrameKind.CENTRAL),
            (("a", "p", "p"), FrameKind.BORDER),
            (("p", "p", "a"), FrameKind.BORDER),
            (("a", "a", "p"), FrameKind.BORDER),
            (("a", "p", "s"), FrameKind.TWO_BORDER),
            (("a", "p", "a"), FrameKind.TWO_BORDER),
        ],
    )
    def test_examples(self, triplet, kind):
        assert classify_triplet(TripletLabel(*triplet)) is kind

    def test_exhaustive_over_three_symbol_patterns(self):
        # All triplets over 3 symbols, checked against the defining invariants.
        for t in itertools.product("abc", repeat=3):
            t = TripletLabel(*t)
            kind = classify_triplet(t)
            if t.start == t.centre == t.end:
                assert kind is FrameKind.CENTRAL
            elif t.centre != t.start and t.centre != t.end:
                assert kind is FrameKind.TWO_BORDER
            else:
                assert kind is FrameKind.BORDER
                assert t.start != t.end or t.centre in (t.start, t.end)


class TestLabelUtteranceFrames:
    def test_350ms_gives_17_frames(self):
        ann = _ann(("i1", 0.0, 0.07), ("l", 0.07, 0.16), ("a0", 0.16, 0.35))
        assert len(label_utterance_frames(ann)) == 17

    def test_exactly_one_frame(self):
        assert len(label_utterance_frames(_ann(("a", 0.0, 0.020)))) == 1

    def test_partial_window_dropped(self):
        assert label_utterance_frames(_ann(("a", 0.0, 0.019))) == []

    def test_tiling_and_kinds(self, rng):
        for _ in range(20):
            ann = random_annotation(rng)
            frames = label_utterance_frames(ann)
            for f in frames:
                assert f.window[0] == pytest.approx(f.frame_index * 0.02)
                assert classify_triplet(f.triplet) is f.kind

    def test_long_segment_yields_central_frame(self):
        # any segment of >= 2 frame durations contains a fully interior frame
        ann = _ann(("a", 0.0, 0.02), ("p", 0.02, 0.06), ("a", 0.06, 0.08))
        frames = label_utterance_frames(ann)
        assert any(
            f.kind is FrameKind.CENTRAL and f.triplet.centre == "p" for f in frames
        )


class TestFilterFrames:
    def _frames(self):
        ann = _ann(("a", 0.0, 0.03), ("p", 0.03, 0.045), ("s", 0.045, 0.1))
        return label_utterance_frames(ann)

    def test_exclude_two_border_and_targets(self):
        frames = self._frames()
        kept = filter_frames(frames, {"a", "p", "s"})
        assert all(f.kind is not FrameKind.TWO_BORDER for f in kept)
        assert kept  # central/border frames survive

    def test_targets_restrict(self):
        frames = self._frames()
        kept = filter_frames(frames, {"s"})
        assert all(set(f.triplet) == {"s"} for f in kept)

    def test_empty_input(self):
        assert filter_frames([], {"a"}) == []

    def test_pure_selection(self):
        frames = self._frames()
        kept = filter_frames(frames, {"a", "p", "s"}, exclude_two_border=False)
        assert kept == frames


def test_frame_tsv_round_trip():
    ann = _ann(("a", 0.0, 0.03), ("p", 0.03, 0.08))
    frames = label_utterance_frames(ann)
    text = frames_to_tsv(frames)
    assert triplets_from_tsv(text) == [f.triplet for f in frames]
