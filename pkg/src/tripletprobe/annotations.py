"""Time-aligned phonetic segmentations and the phoneme inventory.

The interchange format is a strict TSV:

    utt_id\tspeaker_id\tstart_s\tend_s\tlabel

with a header line, decimal-point seconds, and all rows of one utterance
contiguous in the file and time-ordered.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    EmptyInventory,
    EmptyUtterance,
    MalformedLine,
    NonContiguous,
    NonPositiveDuration,
)

TSV_HEADER = "utt_id\tspeaker_id\tstart_s\tend_s\tlabel"

# Contiguity tolerance for float-parsed boundary times, in seconds.
CONTIGUITY_TOL = 1e-9


@dataclass(frozen=True)
class Segment:
    """One labelled interval [start, end) in seconds."""

    label: str
    start: float
    end: float

    def __post_init__(self):
        if self.start < 0:
            raise NonPositiveDuration(f"negative start time {self.start}")
        if self.end <= self.start:
            raise NonPositiveDuration(
                f"segment '{self.label}' has non-positive duration "
                f"[{self.start}, {self.end}]"
            )

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class UtteranceAnnotation:
    """Contiguous, time-ordered segments of one recording."""

    utt_id: str
    speaker_id: str
    segments: tuple[Segment, ...]

    def __post_init__(self):
        if not self.segments:
            raise EmptyUtterance(f"utterance '{self.utt_id}' has no segments")
        for a, b in zip(self.segments, self.segments[1:]):
            if abs(a.end - b.start) > CONTIGUITY_TOL:
                raise NonContiguous(
                    f"utterance '{self.utt_id}': segment ending at {a.end} "
                    f"followed by segment starting at {b.start}"
                )

    @property
    def start(self) -> float:
        return self.segments[0].start

    @property
    def end(self) -> float:
        return self.segments[-1].end

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class PhonemeInventory:
    """Dense, lexicographically ordered class ids for retained symbols."""

    symbols: tuple[str, ...]
    counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("inventory symbols must be unique")
        object.__setattr__(
            self, "_index", {s: i for i, s in enumerate(self.symbols)}
        )

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index

    def index(self, symbol: str) -> int:
        return self._index[symbol]


def parse_segmentation(text: str) -> list[UtteranceAnnotation]:
    """Parse the segmentation TSV into one annotation per utterance."""
    lines = text.splitlines()
    if not lines or lines[0].rstrip("\n") != TSV_HEADER:
        raise MalformedLine("missing or wrong header line")

    annotations: list[UtteranceAnnotation] = []
    seen: set[str] = set()
    cur_id = None
    cur_speaker = None
    cur_segments: list[Segment] = []

    def flush():
        if cur_id is not None:
            annotations.append(
                UtteranceAnnotation(cur_id, cur_speaker, tuple(cur_segments))
            )

    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 5:
            raise MalformedLine(f"line {lineno}: expected 5 columns, got {len(cols)}")
        utt_id, speaker_id, start_s, end_s, label = cols
        try:
            start = float(start_s)
            end = float(end_s)
        except ValueError:
            raise MalformedLine(f"line {lineno}: non-numeric time") from None
        if utt_id != cur_id:
            if utt_id in seen:
                raise MalformedLine(
                    f"line {lineno}: rows for utterance '{utt_id}' are not contiguous"
                )
            flush()
            seen.add(utt_id)
            cur_id, cur_speaker, cur_segments = utt_id, speaker_id, []
        cur_segments.append(Segment(label, start, end))
    flush()
    return annotations


def write_segmentation(annotations: list[UtteranceAnnotation]) -> str:
    """Serialize annotations back to the TSV format (round-trip exact)."""
    rows = [TSV_HEADER]
    for ann in annotations:
        for seg in ann.segments:
            rows.append(
                f"{ann.utt_id}\t{ann.speaker_id}\t{float(seg.start)!r}"
                f"\t{float(seg.end)!r}\t{seg.label}"
            )
    return "\n".join(rows) + "\n"


def build_inventory(
    annotations: list[UtteranceAnnotation], min_count: int = 50
) -> PhonemeInventory:
    """Count segment labels and keep those occurring at least min_count times."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts: dict[str, int] = {}
    for ann in annotations:
        for seg in ann.segments:
            counts[seg.label] = counts.get(seg.label, 0) + 1
    kept = sorted(s for s, c in counts.items() if c >= min_count)
    if not kept:
        raise EmptyInventory(f"no symbol has count >= {min_count}")
    return PhonemeInventory(tuple(kept), {s: counts[s] for s in kept})
