"""Run a frozen TorchScript embedding model over WAV files.

The checkpoint must be a TorchScript module mapping a waveform tensor to a
frame-embedding tensor (1, n_frames, dim). Both the (1, 1, n_samples) and
(1, n_samples) input conventions are tried. The model is run in eval mode
under no_grad with a fixed torch seed, so re-extraction of identical audio
is bit-identical.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .audio import TARGET_RATE, load_wav
from .errors import BadAudio, CheckpointLoadFailure, FrameRateMismatch
from .femb import write_femb

# Allowed deviation between produced and expected frame counts; edge
# padding conventions differ between extractors, so downstream consumers
# truncate to the shorter of labels and embeddings.
FRAME_TOLERANCE = 1
# Which model output is dumped; recorded in the run metadata.
TAP_POINT = "final_output"


@dataclass(frozen=True)
class ExtractionJob:
    wav_paths: tuple[Path, ...]
    speakers: dict[str, str]  # utt_id -> speaker_id
    checkpoint: Path
    out_dir: Path
    frame_ms: int = 20

    def __post_init__(self):
        if self.frame_ms <= 0:
            raise ValueError("frame_ms must be positive")
        missing = [
            p.stem for p in self.wav_paths if p.stem not in self.speakers
        ]
        if missing:
            raise BadAudio(f"no speaker mapping for: {sorted(missing)}")


def parse_speakers(text: str) -> dict[str, str]:
    """TSV with header 'utt_id<TAB>speaker_id', one mapping per line."""
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines or lines[0].rstrip() != "utt_id\tspeaker_id":
        raise BadAudio("speakers file must start with 'utt_id\\tspeaker_id'")
    mapping = {}
    for ln in lines[1:]:
        parts = ln.rstrip("\n").split("\t")
        if len(parts) != 2 or not all(parts):
            raise BadAudio(f"malformed speakers line: {ln!r}")
        mapping[parts[0]] = parts[1]
    return mapping


def load_checkpoint(path: str | Path) -> torch.jit.ScriptModule:
    try:
        model = torch.jit.load(str(path), map_location="cpu")
    except Exception as exc:
        raise CheckpointLoadFailure(
            f"cannot load TorchScript checkpoint '{path}': {exc}"
        ) from exc
    model.eval()
    return model


def _run_model(model, samples: np.ndarray) -> np.ndarray:
    x = torch.from_numpy(samples).reshape(1, 1, -1)
    with torch.no_grad():
        try:
            out = model(x)
        except (RuntimeError, torch.jit.Error):
            out = model(x.reshape(1, -1))
    if out.dim() != 3 or out.shape[0] != 1:
        raise CheckpointLoadFailure(
            f"model output has shape {tuple(out.shape)}, expected (1, n_frames, dim)"
        )
    return out[0].cpu().numpy()


def extract_one(model, wav_path: Path, frame_ms: int) -> np.ndarray:
    samples = load_wav(wav_path)
    torch.manual_seed(0)
    frames = _run_model(model, samples)
    expected = int(len(samples) / (TARGET_RATE * frame_ms / 1000))
    if abs(frames.shape[0] - expected) > FRAME_TOLERANCE:
        raise FrameRateMismatch(
            f"'{wav_path.name}': model produced {frames.shape[0]} frames, "
            f"expected {expected} +/- {FRAME_TOLERANCE} at {frame_ms} ms"
        )
    return frames


def extract(job: ExtractionJob) -> list[dict]:
    """Write one FEMB file per WAV plus manifest.json; returns the entries."""
    model = load_checkpoint(job.checkpoint)
    job.out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for wav_path in sorted(job.wav_paths):
        utt_id = wav_path.stem
        frames = extract_one(model, wav_path, job.frame_ms)
        fname = f"{utt_id}.femb"
        (job.out_dir / fname).write_bytes(
            write_femb(utt_id, job.frame_ms, frames)
        )
        entries.append(
            {
                "file": fname,
                "utt_id": utt_id,
                "speaker_id": job.speakers[utt_id],
                "n_frames": int(frames.shape[0]),
                "frame_tolerance": FRAME_TOLERANCE,
            }
        )
    (job.out_dir / "manifest.json").write_text(
        json.dumps(entries, indent=2) + "\n"
    )
    (job.out_dir / "extraction.json").write_text(
        json.dumps(
            {
                "checkpoint": str(job.checkpoint),
                "checkpoint_sha256": hashlib.sha256(
                    Path(job.checkpoint).read_bytes()
                ).hexdigest(),
                "tap_point": TAP_POINT,
                "frame_ms": job.frame_ms,
                "frame_tolerance": FRAME_TOLERANCE,
                "sample_rate": TARGET_RATE,
            },
            indent=2,
        )
        + "\n"
    )
    return entries
