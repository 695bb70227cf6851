"""Offline extraction of frame embeddings from WAV files into FEMB files."""
from .audio import TARGET_RATE, load_wav
from .errors import (
    BadAudio,
    CheckpointLoadFailure,
    ExtractionError,
    FrameRateMismatch,
)
from .extract import (
    FRAME_TOLERANCE,
    ExtractionJob,
    extract,
    extract_one,
    load_checkpoint,
    parse_speakers,
)
from .femb import write_femb

__version__ = "0.1.0"
