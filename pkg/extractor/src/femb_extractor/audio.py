"""WAV loading normalized to mono 16 kHz float32."""
from __future__ import annotations

import wave
from math import gcd
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from .errors import BadAudio

TARGET_RATE = 16_000

_PCM_DTYPES = {1: np.uint8, 2: np.dtype("<i2"), 4: np.dtype("<i4")}


def load_wav(path: str | Path) -> np.ndarray:
    """Decode a PCM WAV file to mono float32 in [-1, 1] at 16 kHz."""
    try:
        with wave.open(str(path), "rb") as wf:
            rate = wf.getframerate()
            channels = wf.getnchannels()
            width = wf.getsampwidth()
            raw = wf.readframes(wf.getnframes())
    except (OSError, wave.Error, EOFError) as exc:
        raise BadAudio(f"cannot read WAV '{path}': {exc}") from exc

    dtype = _PCM_DTYPES.get(width)
    if dtype is None:
        raise BadAudio(f"unsupported sample width {width} bytes in '{path}'")
    samples = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    if width == 1:  # 8-bit WAV is unsigned
        samples = samples - 128.0
    samples /= float(2 ** (8 * width - 1))

    if channels > 1:
        samples = samples.reshape(-1, channels).mean(axis=1)
    if samples.size == 0:
        raise BadAudio(f"'{path}' contains no samples")

    if rate != TARGET_RATE:
        g = gcd(rate, TARGET_RATE)
        samples = resample_poly(samples, TARGET_RATE // g, rate // g)
    return samples.astype(np.float32)
