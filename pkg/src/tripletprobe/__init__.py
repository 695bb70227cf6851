"""Toolkit for probing temporal phoneme structure in frame-level speech embeddings."""

from .annotations import (
    PhonemeInventory,
    Segment,
    UtteranceAnnotation,
    build_inventory,
    parse_segmentation,
    write_segmentation,
)
from .framing import (
    FrameKind,
    FrameLabelSet,
    TripletLabel,
    classify_triplet,
    filter_frames,
    label_utterance_frames,
    triplet_for_window,
)
from .embedio import (
    EmbeddingFile,
    ProbeDataset,
    SegmentAveragedDataset,
    assemble_dataset,
    average_segments,
    read_embeddings,
    speaker_split,
    write_embeddings,
)
from .probe import (
    ProbeConfig,
    ProbeModel,
    TrainConfig,
    TripletProbe,
    load_model,
    predict,
    save_model,
    train,
)
from .metrics import MetricsReport, balanced_accuracy, confusion, report
from .baseline import (
    BaselineConfig,
    Protocol,
    expected_ordered_baseline,
    simulate_ordered_baseline,
)
from .decoder import (
    BoundaryEvent,
    FrameDecode,
    decode_frames,
    locate_boundaries,
    sequence_ordered_accuracy,
)
from .synthgen import SynthConfig, generate

__version__ = "0.1.0"
