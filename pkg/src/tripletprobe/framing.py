"""Alignment of fixed 20 ms embedding frames to phonetic annotations.

Frames tile the utterance from t = 0 without overlap; frame i covers
[i * frame_s, (i+1) * frame_s). Each frame gets a triplet of phoneme labels
read at the window's start instant, midpoint, and end instant (half-open
segment membership), and is classified by how many phoneme boundaries it
contains.
"""
from __future__ import annotations

import enum
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .annotations import UtteranceAnnotation
from .errors import WindowOutOfRange

# Offset used to sample the end instant strictly inside the window.
END_EPS = 1e-6
# Slack for float noise when checking window bounds against the annotation.
BOUND_TOL = 1e-9


class TripletLabel(NamedTuple):
    start: str
    centre: str
    end: str


class FrameKind(enum.Enum):
    CENTRAL = "central"
    BORDER = "border"
    TWO_BORDER = "two_border"


@dataclass(frozen=True)
class FrameLabelSet:
    utt_id: str
    speaker_id: str
    frame_index: int
    window: tuple[float, float]
    triplet: TripletLabel
    kind: FrameKind


def label_at(annotation: UtteranceAnnotation, t: float) -> str:
    """Label of the segment containing time t (half-open intervals)."""
    segs = annotation.segments
    if t < segs[0].start - BOUND_TOL or t >= segs[-1].end:
        raise WindowOutOfRange(
            f"time {t} outside annotated span [{segs[0].start}, {segs[-1].end})"
        )
    starts = [s.start for s in segs]
    # Snap instants within BOUND_TOL below a boundary onto it, so float noise
    # in how an instant was computed cannot flip its segment membership.
    i = bisect_right(starts, t + BOUND_TOL) - 1
    if i < 0:
        i = 0
    return segs[i].label


def triplet_for_window(
    annotation: UtteranceAnnotation, window_start: float, window_end: float
) -> TripletLabel:
    """Labels at the window's start instant, midpoint, and end instant."""
    if window_end <= window_start:
        raise WindowOutOfRange("window must have positive duration")
    if window_start < annotation.start - BOUND_TOL:
        raise WindowOutOfRange(
            f"window start {window_start} before annotation start {annotation.start}"
        )
    if window_end > annotation.end + BOUND_TOL:
        raise WindowOutOfRange(
            f"window end {window_end} past annotation end {annotation.end}"
        )
    start = label_at(annotation, max(window_start, annotation.start))
    centre = label_at(annotation, (window_start + window_end) / 2.0)
    end = label_at(annotation, min(window_end, annotation.end) - END_EPS)
    return TripletLabel(start, centre, end)


def classify_triplet(t: TripletLabel) -> FrameKind:
    if t.start == t.centre == t.end:
        return FrameKind.CENTRAL
    if t.centre != t.start and t.centre != t.end:
        return FrameKind.TWO_BORDER
    return FrameKind.BORDER


def label_utterance_frames(
    annotation: UtteranceAnnotation, frame_ms: int = 20
) -> list[FrameLabelSet]:
    """Tile [0, duration) with frames; the final partial window is dropped."""
    frame_s = frame_ms / 1000.0
    n = int(annotation.end / frame_s + BOUND_TOL)
    frames = []
    for i in range(n):
        w0 = i * frame_s
        w1 = (i + 1) * frame_s
        triplet = triplet_for_window(annotation, w0, w1)
        frames.append(
            FrameLabelSet(
                utt_id=annotation.utt_id,
                speaker_id=annotation.speaker_id,
                frame_index=i,
                window=(w0, w1),
                triplet=triplet,
                kind=classify_triplet(triplet),
            )
        )
    return frames


def filter_frames(
    frames: Iterable[FrameLabelSet],
    targets: set[str],
    exclude_two_border: bool = True,
) -> list[FrameLabelSet]:
    """Keep frames whose triplet symbols all lie in the target set."""
    if not targets:
        raise ValueError("target set must be non-empty")
    kept = []
    for f in frames:
        if exclude_two_border and f.kind is FrameKind.TWO_BORDER:
            continue
        if all(sym in targets for sym in f.triplet):
            kept.append(f)
    return kept


FRAME_TSV_HEADER = "utt_id\tframe_index\tstart\tcentre\tend\tkind"


def frames_to_tsv(frames: Iterable[FrameLabelSet]) -> str:
    """Inspection dump of frame labels."""
    rows = [FRAME_TSV_HEADER]
    for f in frames:
        t = f.triplet
        rows.append(
            f"{f.utt_id}\t{f.frame_index}\t{t.start}\t{t.centre}\t{t.end}\t{f.kind.value}"
        )
    return "\n".join(rows) + "\n"


def triplets_from_tsv(text: str) -> list[TripletLabel]:
    """Read back the triplet column triple from a frame label dump."""
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != FRAME_TSV_HEADER:
        raise ValueError("missing or wrong frame-dump header")
    triplets = []
    for line in lines[1:]:
        cols = line.split("\t")
        if len(cols) != 6:
            raise ValueError(f"expected 6 columns, got {len(cols)}")
        triplets.append(TripletLabel(cols[2], cols[3], cols[4]))
    return triplets
