"""Frame-by-frame decoding of a continuous recording with a trained probe.

Emits per-frame probability tracks over the model's inventory and localizes
phoneme boundaries from the argmax triplets: a frame whose start and end
argmax differ reports a boundary inside the frame (at its midpoint); a label
change across a frame edge not already explained by an adjacent within-frame
event reports a boundary at the edge.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .annotations import UtteranceAnnotation
from .embedio import EmbeddingFile
from .errors import DimensionMismatch, UnorderedInput
from .framing import TripletLabel, triplet_for_window
from .metrics import ordered_accuracy
from .probe import ProbeModel, predict

HEAD_CODES = ("s", "c", "e")


@dataclass(frozen=True)
class FrameDecode:
    frame_index: int
    time_s: float  # window start
    probs: tuple[np.ndarray, ...]  # one probability vector per head
    triplet: TripletLabel  # argmax symbols
    symbols: tuple[str, ...]  # inventory the probability vectors index


@dataclass(frozen=True)
class BoundaryEvent:
    time_s: float
    left_label: str
    right_label: str
    evidence: str  # "WithinFrame" | "BetweenFrames"


def decode_frames(model: ProbeModel, emb: EmbeddingFile) -> list[FrameDecode]:
    if emb.dim != model.config.input_dim:
        raise DimensionMismatch(
            f"embedding dim {emb.dim} != model input dim {model.config.input_dim}"
        )
    if emb.n_frames == 0:
        return []
    probs, argmax = predict(model, emb.data)
    symbols = model.inventory.symbols
    frame_s = emb.frame_ms / 1000.0
    decodes = []
    for i in range(emb.n_frames):
        ids = argmax[i]
        triplet = TripletLabel(*(symbols[j] for j in ids)) if len(ids) == 3 else (
            TripletLabel(symbols[ids[0]], symbols[ids[0]], symbols[ids[0]])
        )
        decodes.append(
            FrameDecode(
                frame_index=i,
                time_s=i * frame_s,
                probs=tuple(p[i] for p in probs),
                triplet=triplet,
                symbols=symbols,
            )
        )
    return decodes


def locate_boundaries(
    decodes: Sequence[FrameDecode], frame_ms: int = 20
) -> list[BoundaryEvent]:
    if any(
        b.frame_index <= a.frame_index for a, b in zip(decodes, decodes[1:])
    ):
        raise UnorderedInput("decodes must be ordered by frame_index")
    frame_s = frame_ms / 1000.0
    events = []
    within = set()
    for d in decodes:
        t = d.triplet
        if t.start != t.end:
            events.append(
                BoundaryEvent(
                    time_s=d.time_s + frame_s / 2.0,
                    left_label=t.start,
                    right_label=t.end,
                    evidence="WithinFrame",
                )
            )
            within.add(d.frame_index)
    for a, b in zip(decodes, decodes[1:]):
        if a.triplet.end != b.triplet.start:
            if a.frame_index in within or b.frame_index in within:
                continue
            events.append(
                BoundaryEvent(
                    time_s=(a.frame_index + 1) * frame_s,
                    left_label=a.triplet.end,
                    right_label=b.triplet.start,
                    evidence="BetweenFrames",
                )
            )
    events.sort(key=lambda e: e.time_s)
    return events


def sequence_ordered_accuracy(
    decodes: Sequence[FrameDecode],
    reference: UtteranceAnnotation,
    frame_ms: int = 20,
) -> float:
    """Ordered accuracy of the argmax triplets against the reference labelling."""
    frame_s = frame_ms / 1000.0
    truths = [
        triplet_for_window(reference, d.time_s, d.time_s + frame_s)
        for d in decodes
    ]
    return ordered_accuracy([d.triplet for d in decodes], truths)


def export_track(
    decodes: Sequence[FrameDecode], targets: set[str] | None = None
) -> str:
    """Long-format CSV of per-frame probabilities for external plotting."""
    buf = io.StringIO()
    buf.write("frame_index,time_s,head,symbol,probability\n")
    for d in decodes:
        for head, prob in zip(HEAD_CODES, d.probs):
            for sym, p in zip(d.symbols, prob):
                if targets is not None and sym not in targets:
                    continue
                buf.write(f"{d.frame_index},{d.time_s:.6f},{head},{sym},{p:.8f}\n")
    return buf.getvalue()


def boundaries_to_json(events: Sequence[BoundaryEvent]) -> str:
    return json.dumps(
        [
            {
                "time_s": e.time_s,
                "left": e.left_label,
                "right": e.right_label,
                "evidence": e.evidence,
            }
            for e in events
        ],
        indent=2,
    )
