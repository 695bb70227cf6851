import json

import numpy as np
import pytest
from extractor_helpers import read_femb_raw, write_wav

from femb_extractor.errors import (
    BadAudio,
    CheckpointLoadFailure,
    FrameRateMismatch,
)
from femb_extractor.extract import (
    ExtractionJob,
    extract,
    extract_one,
    load_checkpoint,
    parse_speakers,
)


def make_job(tmp_path, checkpoint, durations, **kw):
    wav_dir = tmp_path / "wavs"
    wav_dir.mkdir()
    paths = []
    for i, dur in enumerate(durations):
        paths.append(write_wav(wav_dir / f"utt{i}.wav", dur))
    speakers = {f"utt{i}": f"spk{i % 2}" for i in range(len(durations))}
    return ExtractionJob(
        wav_paths=tuple(paths),
        speakers=speakers,
        checkpoint=checkpoint,
        out_dir=tmp_path / "out",
        **kw,
    )


class TestParseSpeakers:
    def test_ok(self):
        text = "utt_id\tspeaker_id\nu1\ts1\nu2\ts1\n"
        assert parse_speakers(text) == {"u1": "s1", "u2": "s1"}

    def test_missing_header(self):
        with pytest.raises(BadAudio):
            parse_speakers("u1\ts1\n")

    def test_malformed_line(self):
        with pytest.raises(BadAudio):
            parse_speakers("utt_id\tspeaker_id\nu1\n")


class TestExtractOne:
    def test_350ms_gives_17_frames(self, tmp_path, checkpoint):
        wav = write_wav(tmp_path / "a.wav", 0.35)
        model = load_checkpoint(checkpoint)
        frames = extract_one(model, wav, frame_ms=20)
        assert abs(frames.shape[0] - 17) <= 1
        assert frames.shape[1] == 8

    def test_20ms_gives_one_frame(self, tmp_path, checkpoint):
        wav = write_wav(tmp_path / "b.wav", 0.02)
        model = load_checkpoint(checkpoint)
        frames = extract_one(model, wav, frame_ms=20)
        assert abs(frames.shape[0] - 1) <= 1

    def test_hop_mismatch_detected(self, tmp_path, slow_checkpoint):
        wav = write_wav(tmp_path / "c.wav", 0.35)
        model = load_checkpoint(slow_checkpoint)
        with pytest.raises(FrameRateMismatch):
            extract_one(model, wav, frame_ms=20)

    def test_deterministic(self, tmp_path, checkpoint):
        wav = write_wav(tmp_path / "d.wav", 0.3)
        model = load_checkpoint(checkpoint)
        a = extract_one(model, wav, frame_ms=20)
        b = extract_one(model, wav, frame_ms=20)
        assert np.array_equal(a, b)


class TestJob:
    def test_missing_speaker_mapping(self, tmp_path, checkpoint):
        wav = write_wav(tmp_path / "u.wav", 0.1)
        with pytest.raises(BadAudio):
            ExtractionJob(
                wav_paths=(wav,),
                speakers={},
                checkpoint=checkpoint,
                out_dir=tmp_path / "o",
            )

    def test_bad_checkpoint(self, tmp_path):
        bad = tmp_path / "ckpt.pt"
        bad.write_bytes(b"not a torchscript archive")
        with pytest.raises(CheckpointLoadFailure):
            load_checkpoint(bad)


class TestExtract:
    def test_outputs_and_manifest(self, tmp_path, checkpoint):
        job = make_job(tmp_path, checkpoint, [0.35, 0.2, 0.1])
        entries = extract(job)
        assert [e["utt_id"] for e in entries] == ["utt0", "utt1", "utt2"]
        manifest = json.loads((job.out_dir / "manifest.json").read_text())
        assert manifest == entries
        for e in entries:
            utt_id, frame_ms, data = read_femb_raw(
                (job.out_dir / e["file"]).read_bytes()
            )
            assert utt_id == e["utt_id"]
            assert frame_ms == 20
            assert data.shape[0] == e["n_frames"]
        meta = json.loads((job.out_dir / "extraction.json").read_text())
        assert meta["frame_ms"] == 20 and meta["tap_point"]

    def test_reextraction_bit_identical(self, tmp_path, checkpoint):
        job = make_job(tmp_path, checkpoint, [0.35, 0.15])
        extract(job)
        first = {
            p.name: p.read_bytes() for p in job.out_dir.glob("*.femb")
        }
        extract(job)
        second = {
            p.name: p.read_bytes() for p in job.out_dir.glob("*.femb")
        }
        assert first == second
