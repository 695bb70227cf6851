"""Writer for the FEMB embedding container.

Layout (little-endian):

    magic "FEMB" | version u16 = 1 | reserved u16 = 0 | dim u32 |
    n_frames u32 | frame_ms u32 | utt_id_len u16 | utt_id UTF-8 |
    f32 data row-major
"""
from __future__ import annotations

import struct

import numpy as np

FEMB_MAGIC = b"FEMB"
FEMB_VERSION = 1
_HEADER = struct.Struct("<4sHHIIIH")


def write_femb(utt_id: str, frame_ms: int, data: np.ndarray) -> bytes:
    rows = np.ascontiguousarray(data, dtype="<f4")
    if rows.ndim != 2:
        raise ValueError("data must be a (n_frames, dim) matrix")
    if not np.all(np.isfinite(rows)):
        raise ValueError(f"non-finite embedding value for '{utt_id}'")
    utt = utt_id.encode("utf-8")
    header = _HEADER.pack(
        FEMB_MAGIC, FEMB_VERSION, 0, rows.shape[1], rows.shape[0],
        frame_ms, len(utt),
    )
    return header + utt + rows.tobytes()
