"""Random-order chance baseline for ordered accuracy.

A hypothetical model identifies the phonemes present in a frame with
probability p each, then emits them in a random order. Two protocols pin
down the ambiguity in that story:

- PerPosition: each of the three position slots is identified independently;
  if all three are, the multiset of true symbols is emitted in a uniformly
  random arrangement. Expected per-example correctness is p^3 / A with A the
  number of distinct arrangements of the true multiset.
- PerSet: each distinct symbol is identified independently; if all k are, a
  tuple is drawn uniformly from the 3-tuples using every identified symbol
  at least once. Expected correctness is p^k / C with C the number of such
  surjective tuples (1, 6, 6 for k = 1, 2, 3).

Both a closed form and a seeded Monte Carlo estimator are provided.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import Empty
from .framing import TripletLabel


class Protocol(enum.Enum):
    PER_POSITION = "per_position"
    PER_SET = "per_set"


@dataclass(frozen=True)
class BaselineConfig:
    p_identify: float = 0.9
    protocol: Protocol = Protocol.PER_POSITION
    trials: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_identify <= 1.0:
            raise ValueError("p_identify must lie in [0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


_PERMS = list(itertools.permutations(range(3)))


def _arrangements(truth) -> int:
    """Distinct arrangements of the truth's symbol multiset."""
    return len({tuple(truth[i] for i in perm) for perm in _PERMS})


def _surjective_count(k: int) -> int:
    # 3-tuples over k symbols using each at least once: 1, 2^3-2, 3!.
    return {1: 1, 2: 6, 3: 6}[k]


def expected_ordered_baseline(
    truths: Sequence[TripletLabel], cfg: BaselineConfig
) -> float:
    """Closed-form expected ordered accuracy of the chance model."""
    if not truths:
        raise Empty("no truths")
    p = cfg.p_identify
    total = 0.0
    for t in truths:
        if cfg.protocol is Protocol.PER_POSITION:
            total += p**3 / _arrangements(t)
        else:
            k = len(set(t))
            total += p**k / _surjective_count(k)
    return total / len(truths)


def simulate_ordered_baseline(
    truths: Sequence[TripletLabel], cfg: BaselineConfig
) -> tuple[float, float]:
    """Monte Carlo estimate of the chance-model ordered accuracy.

    Returns (mean, standard error) of the per-pass ordered accuracy over
    cfg.trials independent passes through the truths.
    """
    if not truths:
        raise Empty("no truths")
    rng = np.random.default_rng(cfg.seed)
    n = len(truths)
    trials = cfg.trials
    p = cfg.p_identify

    if cfg.protocol is Protocol.PER_POSITION:
        # perm_ok[i, j]: does permutation j of truth i's symbols equal truth i?
        perm_ok = np.array(
            [
                [tuple(t[i] for i in perm) == tuple(t) for perm in _PERMS]
                for t in truths
            ],
            bool,
        )
        correct_rows = []
        for lo in range(0, trials, 4096):
            t_chunk = min(4096, trials - lo)
            ident = (rng.random((t_chunk, n, 3)) < p).all(axis=2)
            perm = rng.integers(0, len(_PERMS), (t_chunk, n))
            correct_rows.append(ident & perm_ok[np.arange(n), perm])
        correct = np.concatenate(correct_rows)
    else:
        kvec = np.array([len(set(t)) for t in truths])
        cvec = np.array([_surjective_count(k) for k in kvec])
        pos = np.arange(3)
        correct_rows = []
        for lo in range(0, trials, 4096):
            t_chunk = min(4096, trials - lo)
            draws = rng.random((t_chunk, n, 3))
            ident = ((draws < p) | (pos[None, None, :] >= kvec[None, :, None])).all(
                axis=2
            )
            arr = rng.integers(0, 6, (t_chunk, n))
            correct_rows.append(ident & (arr % cvec[None, :] == 0))
        correct = np.concatenate(correct_rows)

    per_pass = correct.mean(axis=1)
    mean = float(per_pass.mean())
    if trials > 1:
        stderr = float(per_pass.std(ddof=1) / np.sqrt(trials))
    else:
        stderr = float("nan")
    return mean, stderr
