"""Order-sensitive evaluation of triplet predictions.

Three aggregate accuracies with strictly nested per-example correctness on
central/border truths:

- ordered: all three positions match componentwise;
- flexible centre: start and end match exactly, centre may equal either true
  boundary label;
- unordered: the sets of distinct predicted and true symbols are equal.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from .annotations import PhonemeInventory
from .errors import ClassWithoutSupport, Empty, LengthMismatch, UnknownSymbol
from .framing import TripletLabel

POSITIONS = ("start", "centre", "end")


@dataclass(frozen=True)
class MetricsReport:
    ordered: float
    unordered: float
    flexible_centre: float
    start_acc: float
    centre_acc: float
    end_acc: float
    n_examples: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


@dataclass(frozen=True)
class ConfusionMatrix:
    position: str
    symbols: tuple[str, ...]
    counts: np.ndarray  # (K, K) int64, rows = true class, cols = predicted

    def normalized(self) -> np.ndarray:
        sums = self.counts.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = self.counts / sums
        return np.nan_to_num(out)


def _check_pair(preds, truths):
    if len(preds) != len(truths):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(truths)} truths")
    if len(truths) == 0:
        raise Empty("no examples to score")


def ordered_correct(pred: TripletLabel, truth: TripletLabel) -> bool:
    return tuple(pred) == tuple(truth)


def unordered_correct(pred: TripletLabel, truth: TripletLabel) -> bool:
    return set(pred) == set(truth)


def flexible_centre_correct(pred: TripletLabel, truth: TripletLabel) -> bool:
    return (
        pred[0] == truth[0]
        and pred[2] == truth[2]
        and pred[1] in (truth[0], truth[2])
    )


def ordered_accuracy(preds: Sequence, truths: Sequence) -> float:
    _check_pair(preds, truths)
    return sum(ordered_correct(p, t) for p, t in zip(preds, truths)) / len(truths)


def unordered_accuracy(preds: Sequence, truths: Sequence) -> float:
    _check_pair(preds, truths)
    return sum(unordered_correct(p, t) for p, t in zip(preds, truths)) / len(truths)


def flexible_centre_accuracy(preds: Sequence, truths: Sequence) -> float:
    _check_pair(preds, truths)
    return sum(
        flexible_centre_correct(p, t) for p, t in zip(preds, truths)
    ) / len(truths)


def position_accuracy(preds: Sequence, truths: Sequence, position: str) -> float:
    _check_pair(preds, truths)
    i = POSITIONS.index(position)
    return sum(p[i] == t[i] for p, t in zip(preds, truths)) / len(truths)


def report(preds: Sequence, truths: Sequence) -> MetricsReport:
    return MetricsReport(
        ordered=ordered_accuracy(preds, truths),
        unordered=unordered_accuracy(preds, truths),
        flexible_centre=flexible_centre_accuracy(preds, truths),
        start_acc=position_accuracy(preds, truths, "start"),
        centre_acc=position_accuracy(preds, truths, "centre"),
        end_acc=position_accuracy(preds, truths, "end"),
        n_examples=len(truths),
    )


def confusion(
    preds: Sequence,
    truths: Sequence,
    position: str,
    inventory: PhonemeInventory,
) -> ConfusionMatrix:
    _check_pair(preds, truths)
    i = POSITIONS.index(position)
    k = len(inventory)
    counts = np.zeros((k, k), np.int64)
    for p, t in zip(preds, truths):
        if t[i] not in inventory or p[i] not in inventory:
            raise UnknownSymbol(f"symbol not in inventory: {t[i]!r} / {p[i]!r}")
        counts[inventory.index(t[i]), inventory.index(p[i])] += 1
    return ConfusionMatrix(position=position, symbols=inventory.symbols, counts=counts)


def confusion_to_csv(cm: ConfusionMatrix) -> str:
    buf = io.StringIO()
    buf.write("," + ",".join(cm.symbols) + "\n")
    for sym, row in zip(cm.symbols, cm.counts):
        buf.write(sym + "," + ",".join(str(int(c)) for c in row) + "\n")
    return buf.getvalue()


def balanced_accuracy(
    preds: Sequence[str], truths: Sequence[str], inventory: PhonemeInventory
) -> float:
    """Unweighted mean of per-class recall over the inventory."""
    _check_pair(preds, truths)
    recalls = []
    for sym in inventory.symbols:
        idx = [i for i, t in enumerate(truths) if t == sym]
        if not idx:
            raise ClassWithoutSupport(f"class '{sym}' has no true examples")
        recalls.append(sum(preds[i] == sym for i in idx) / len(idx))
    return sum(recalls) / len(recalls)
