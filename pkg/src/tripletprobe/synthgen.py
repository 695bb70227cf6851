"""Synthetic annotated corpora with controllable separability.

Each phoneme gets a unit-norm prototype vector. A frame's embedding is the
concatenation of two cfg.dim-sized channels (output dimensionality 2 * dim):

- identity channel: unweighted mean of the prototypes of the phonemes
  present anywhere in the window (plus the speaker offset). It reveals
  which phonemes a frame contains but not their proportions or order.
- order channel: the difference between the occupancy-weighted prototype
  means of the window's second and first halves, attenuated by
  cfg.order_strength. Its direction carries the temporal order of a
  boundary frame's phonemes; its magnitude is identical for boundaries
  equally far before or after the window midpoint, which leaves the centre
  label of those frames genuinely ambiguous.

White noise of scale cfg.noise_sigma is added to the full vector. This
reproduces the phenomenon under study: phoneme identity is robustly
recoverable, temporal order only partially, and the centre position is the
hardest to classify.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .annotations import Segment, UtteranceAnnotation
from .embedio import EmbeddingFile
from .errors import InvalidConfig

# Durations are quantized to this grid (ms).
DURATION_QUANTUM_MS = 5
# Minimum pairwise prototype distance; below this the set is redrawn.
MIN_PROTOTYPE_DISTANCE = 0.1


@dataclass(frozen=True)
class SynthConfig:
    n_phonemes: int
    dim: int
    n_speakers: int
    utterances_per_speaker: int
    segment_duration_range: tuple[float, float] = (0.03, 0.12)
    noise_sigma: float = 0.0
    speaker_shift_sigma: float = 0.0
    seed: int = 0
    frame_ms: int = 20
    segments_per_utterance: tuple[int, int] = (10, 20)
    order_strength: float = 0.3

    def __post_init__(self):
        lo, hi = self.segment_duration_range
        if lo < 0.005 or hi < lo:
            raise InvalidConfig("segment_duration_range must satisfy 0.005 <= min <= max")
        if min(self.n_phonemes, self.dim, self.n_speakers,
               self.utterances_per_speaker) < 1:
            raise InvalidConfig("counts must be positive")
        if self.noise_sigma < 0 or self.speaker_shift_sigma < 0:
            raise InvalidConfig("sigmas must be non-negative")


def make_prototypes(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """Unit-norm, pairwise well-separated phoneme prototypes."""
    while True:
        protos = rng.normal(size=(cfg.n_phonemes, cfg.dim))
        protos /= np.linalg.norm(protos, axis=1, keepdims=True)
        diffs = protos[:, None, :] - protos[None, :, :]
        dist = np.linalg.norm(diffs, axis=2)
        np.fill_diagonal(dist, np.inf)
        if dist.min() > MIN_PROTOTYPE_DISTANCE:
            return protos


def phoneme_symbols(n: int) -> list[str]:
    return [f"ph{i:02d}" for i in range(n)]


def _half_mean(
    bounds_ms: np.ndarray, protos_shifted: np.ndarray, seq: list[int],
    a_ms: int, b_ms: int,
) -> np.ndarray:
    """Occupancy-weighted prototype mean over the span [a_ms, b_ms)."""
    vec = np.zeros(protos_shifted.shape[1])
    span = b_ms - a_ms
    for k, ph in enumerate(seq):
        overlap = min(bounds_ms[k + 1], b_ms) - max(bounds_ms[k], a_ms)
        if overlap > 0:
            vec += (overlap / span) * protos_shifted[ph]
    return vec


def _presence_mean(
    bounds_ms: np.ndarray, protos_shifted: np.ndarray, seq: list[int],
    a_ms: int, b_ms: int,
) -> np.ndarray:
    """Unweighted mean of prototypes of phonemes overlapping [a_ms, b_ms)."""
    present = [
        ph for k, ph in enumerate(seq)
        if min(bounds_ms[k + 1], b_ms) - max(bounds_ms[k], a_ms) > 0
    ]
    return protos_shifted[present].mean(axis=0)


def generate(
    cfg: SynthConfig,
) -> tuple[list[UtteranceAnnotation], list[EmbeddingFile]]:
    """Build a mutually consistent synthetic corpus of annotations + embeddings."""
    rng = np.random.default_rng(cfg.seed)
    protos = make_prototypes(cfg, rng)
    symbols = phoneme_symbols(cfg.n_phonemes)
    offsets = rng.normal(size=(cfg.n_speakers, cfg.dim)) * cfg.speaker_shift_sigma

    lo_q = max(1, round(cfg.segment_duration_range[0] * 1000 / DURATION_QUANTUM_MS))
    hi_q = max(lo_q, round(cfg.segment_duration_range[1] * 1000 / DURATION_QUANTUM_MS))

    annotations = []
    embeddings = []
    for si in range(cfg.n_speakers):
        speaker_id = f"spk{si}"
        shifted = protos + offsets[si]
        for ui in range(cfg.utterances_per_speaker):
            utt_id = f"{speaker_id}_u{ui:03d}"
            n_seg = int(rng.integers(cfg.segments_per_utterance[0],
                                     cfg.segments_per_utterance[1] + 1))
            seq = []
            for _ in range(n_seg):
                choices = [k for k in range(cfg.n_phonemes)
                           if not seq or k != seq[-1]]
                seq.append(int(rng.choice(choices)))
            durs_ms = rng.integers(lo_q, hi_q + 1, n_seg) * DURATION_QUANTUM_MS
            bounds_ms = np.concatenate([[0], np.cumsum(durs_ms)])

            segments = tuple(
                Segment(symbols[ph], bounds_ms[k] / 1000.0, bounds_ms[k + 1] / 1000.0)
                for k, ph in enumerate(seq)
            )
            annotations.append(UtteranceAnnotation(utt_id, speaker_id, segments))

            total_ms = int(bounds_ms[-1])
            n_frames = total_ms // cfg.frame_ms
            half = cfg.frame_ms // 2
            rows = np.zeros((n_frames, 2 * cfg.dim))
            for i in range(n_frames):
                a = i * cfg.frame_ms
                h1 = _half_mean(bounds_ms, shifted, seq, a, a + half)
                h2 = _half_mean(bounds_ms, shifted, seq, a + half, a + cfg.frame_ms)
                rows[i, : cfg.dim] = _presence_mean(
                    bounds_ms, shifted, seq, a, a + cfg.frame_ms
                )
                rows[i, cfg.dim :] = cfg.order_strength * (h2 - h1)
            if cfg.noise_sigma > 0:
                rows += rng.normal(size=rows.shape) * cfg.noise_sigma
            embeddings.append(
                EmbeddingFile(
                    utt_id=utt_id,
                    frame_ms=cfg.frame_ms,
                    data=rows.astype(np.float32),
                )
            )
    return annotations, embeddings
