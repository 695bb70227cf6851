"""Binary embedding container, dataset assembly, and speaker splits.

Container layout (little-endian):

    magic "FEMB" | version u16 = 1 | reserved u16 = 0 | dim u32 |
    n_frames u32 | frame_ms u32 | utt_id_len u16 | utt_id UTF-8 |
    f32 data row-major

A manifest JSON array of {"file", "utt_id", "speaker_id"} ties container
files to speakers.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .annotations import PhonemeInventory, UtteranceAnnotation
from .errors import (
    BadMagic,
    EmptySide,
    FrameIndexOutOfRange,
    FrameRateMismatch,
    MissingUtterance,
    NonFiniteValue,
    TruncatedPayload,
    UnknownSpeaker,
    UnknownSymbol,
    UnsupportedVersion,
)
from .framing import FrameKind, FrameLabelSet

FEMB_MAGIC = b"FEMB"
FEMB_VERSION = 1
_HEADER = struct.Struct("<4sHHIIIH")

_KIND_CODE = {FrameKind.CENTRAL: 0, FrameKind.BORDER: 1, FrameKind.TWO_BORDER: 2}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}


@dataclass(frozen=True)
class EmbeddingFile:
    """One utterance's frame embeddings."""

    utt_id: str
    frame_ms: int
    data: np.ndarray  # (n_frames, dim) float32

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]


def write_embeddings(emb: EmbeddingFile) -> bytes:
    data = np.ascontiguousarray(emb.data, dtype="<f4")
    if not np.all(np.isfinite(data)):
        raise NonFiniteValue(f"non-finite value in embeddings of '{emb.utt_id}'")
    utt = emb.utt_id.encode("utf-8")
    header = _HEADER.pack(
        FEMB_MAGIC, FEMB_VERSION, 0, data.shape[1], data.shape[0],
        emb.frame_ms, len(utt),
    )
    return header + utt + data.tobytes()


def read_embeddings(blob: bytes) -> EmbeddingFile:
    if len(blob) < _HEADER.size:
        raise TruncatedPayload("blob shorter than header")
    magic, version, _reserved, dim, n_frames, frame_ms, utt_len = _HEADER.unpack_from(
        blob
    )
    if magic != FEMB_MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != FEMB_VERSION:
        raise UnsupportedVersion(f"version {version}")
    offset = _HEADER.size
    if len(blob) < offset + utt_len + n_frames * dim * 4:
        raise TruncatedPayload(
            f"payload shorter than declared {n_frames}x{dim} matrix"
        )
    utt_id = blob[offset : offset + utt_len].decode("utf-8")
    offset += utt_len
    data = np.frombuffer(
        blob, dtype="<f4", count=n_frames * dim, offset=offset
    ).reshape(n_frames, dim).copy()
    if not np.all(np.isfinite(data)):
        raise NonFiniteValue(f"non-finite value in embeddings of '{utt_id}'")
    return EmbeddingFile(utt_id=utt_id, frame_ms=frame_ms, data=data)


def read_manifest(path: str | Path) -> list[dict]:
    """Manifest rows: {"file": relative path, "utt_id", "speaker_id"}."""
    entries = json.loads(Path(path).read_text())
    base = Path(path).parent
    for e in entries:
        e["file"] = str(base / e["file"])
    return entries


def write_manifest(path: str | Path, entries: list[dict]) -> None:
    Path(path).write_text(json.dumps(entries, indent=2) + "\n")


@dataclass
class ProbeDataset:
    """Frame embeddings paired with class-id triplets."""

    features: np.ndarray  # (N, dim) float32
    labels: np.ndarray  # (N, 3) int32 class ids
    speakers: list[str]
    kinds: np.ndarray  # (N,) uint8, codes per _KIND_CODE
    inventory: PhonemeInventory

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def kind_enums(self) -> list[FrameKind]:
        return [_CODE_KIND[int(c)] for c in self.kinds]


@dataclass
class SegmentAveragedDataset:
    """One mean embedding per phoneme segment."""

    features: np.ndarray  # (M, dim) float32
    labels: np.ndarray  # (M,) int32 class ids
    speakers: list[str]
    inventory: PhonemeInventory


def _index_files(files: list[EmbeddingFile]) -> dict[str, EmbeddingFile]:
    by_id = {}
    frame_ms = None
    for f in files:
        if frame_ms is None:
            frame_ms = f.frame_ms
        elif f.frame_ms != frame_ms:
            raise FrameRateMismatch(
                f"file '{f.utt_id}' has frame_ms={f.frame_ms}, expected {frame_ms}"
            )
        by_id[f.utt_id] = f
    return by_id


def assemble_dataset(
    files: list[EmbeddingFile],
    frames: list[FrameLabelSet],
    inventory: PhonemeInventory,
) -> ProbeDataset:
    """Join frame labels with their embedding rows, ordered by (utt_id, frame_index)."""
    by_id = _index_files(files)
    ordered = sorted(frames, key=lambda f: (f.utt_id, f.frame_index))
    rows = []
    labels = []
    speakers = []
    kinds = []
    for f in ordered:
        emb = by_id.get(f.utt_id)
        if emb is None:
            raise MissingUtterance(f"no embedding file for utterance '{f.utt_id}'")
        if f.frame_index >= emb.n_frames:
            raise FrameIndexOutOfRange(
                f"frame {f.frame_index} of '{f.utt_id}' (file has {emb.n_frames})"
            )
        for sym in f.triplet:
            if sym not in inventory:
                raise UnknownSymbol(f"symbol '{sym}' not in inventory")
        rows.append(emb.data[f.frame_index])
        labels.append([inventory.index(s) for s in f.triplet])
        speakers.append(f.speaker_id)
        kinds.append(_KIND_CODE[f.kind])
    dim = files[0].dim if files else 0
    features = (
        np.vstack(rows).astype(np.float32)
        if rows
        else np.zeros((0, dim), np.float32)
    )
    return ProbeDataset(
        features=features,
        labels=np.array(labels, np.int32).reshape(-1, 3),
        speakers=speakers,
        kinds=np.array(kinds, np.uint8),
        inventory=inventory,
    )


def average_segments(
    files: list[EmbeddingFile],
    annotations: list[UtteranceAnnotation],
    inventory: PhonemeInventory,
) -> SegmentAveragedDataset:
    """Mean embedding per segment; a frame belongs to the segment holding its midpoint."""
    by_id = _index_files(files)
    rows = []
    labels = []
    speakers = []
    for ann in sorted(annotations, key=lambda a: a.utt_id):
        emb = by_id.get(ann.utt_id)
        if emb is None:
            raise MissingUtterance(f"no embedding file for utterance '{ann.utt_id}'")
        frame_s = emb.frame_ms / 1000.0
        midpoints = (np.arange(emb.n_frames) + 0.5) * frame_s
        for seg in ann.segments:
            mask = (midpoints >= seg.start) & (midpoints < seg.end)
            if not mask.any():
                continue
            if seg.label not in inventory:
                raise UnknownSymbol(f"symbol '{seg.label}' not in inventory")
            rows.append(emb.data[mask].mean(axis=0))
            labels.append(inventory.index(seg.label))
            speakers.append(ann.speaker_id)
    dim = files[0].dim if files else 0
    features = (
        np.vstack(rows).astype(np.float32)
        if rows
        else np.zeros((0, dim), np.float32)
    )
    return SegmentAveragedDataset(
        features=features,
        labels=np.array(labels, np.int32),
        speakers=speakers,
        inventory=inventory,
    )


def speaker_split(
    dataset: ProbeDataset, train_speakers: set[str]
) -> tuple[ProbeDataset, ProbeDataset]:
    """Partition rows by speaker id; both sides must be non-empty."""
    observed = set(dataset.speakers)
    unknown = set(train_speakers) - observed
    if unknown:
        raise UnknownSpeaker(f"speakers not in dataset: {sorted(unknown)}")
    mask = np.array([s in train_speakers for s in dataset.speakers], bool)
    if mask.all() or not mask.any():
        raise EmptySide("speaker split leaves one side empty")

    def take(m):
        return ProbeDataset(
            features=dataset.features[m],
            labels=dataset.labels[m],
            speakers=[s for s, keep in zip(dataset.speakers, m) if keep],
            kinds=dataset.kinds[m],
            inventory=dataset.inventory,
        )

    return take(mask), take(~mask)


# Packed dataset container for the CLI: magic "PDS1" | u32 json_len |
# JSON header | f32 features | i32 labels | u8 kinds, little-endian.
PDS_MAGIC = b"PDS1"


def write_dataset(dataset: ProbeDataset) -> bytes:
    speaker_table = sorted(set(dataset.speakers))
    spk_idx = {s: i for i, s in enumerate(speaker_table)}
    header = {
        "version": 1,
        "n": len(dataset),
        "dim": int(dataset.features.shape[1]),
        "symbols": list(dataset.inventory.symbols),
        "counts": dataset.inventory.counts,
        "speaker_table": speaker_table,
        "speaker_ids": [spk_idx[s] for s in dataset.speakers],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    out = [PDS_MAGIC, struct.pack("<I", len(blob)), blob]
    out.append(np.ascontiguousarray(dataset.features, "<f4").tobytes())
    out.append(np.ascontiguousarray(dataset.labels, "<i4").tobytes())
    out.append(np.ascontiguousarray(dataset.kinds, np.uint8).tobytes())
    return b"".join(out)


def read_dataset(blob: bytes) -> ProbeDataset:
    if len(blob) < 8 or blob[:4] != PDS_MAGIC:
        raise BadMagic("not a packed dataset")
    (json_len,) = struct.unpack_from("<I", blob, 4)
    header = json.loads(blob[8 : 8 + json_len].decode("utf-8"))
    n, dim = header["n"], header["dim"]
    offset = 8 + json_len
    need = n * dim * 4 + n * 3 * 4 + n
    if len(blob) < offset + need:
        raise TruncatedPayload("packed dataset shorter than declared")
    features = np.frombuffer(blob, "<f4", n * dim, offset).reshape(n, dim).copy()
    offset += n * dim * 4
    labels = np.frombuffer(blob, "<i4", n * 3, offset).reshape(n, 3).copy()
    offset += n * 3 * 4
    kinds = np.frombuffer(blob, np.uint8, n, offset).copy()
    inventory = PhonemeInventory(
        tuple(header["symbols"]), {k: int(v) for k, v in header["counts"].items()}
    )
    speakers = [header["speaker_table"][i] for i in header["speaker_ids"]]
    return ProbeDataset(
        features=features,
        labels=labels,
        speakers=speakers,
        kinds=kinds,
        inventory=inventory,
    )
