import json

from extractor_helpers import write_wav

from femb_extractor.cli import dispatch


def setup_corpus(tmp_path, n=2):
    wav_dir = tmp_path / "wavs"
    wav_dir.mkdir()
    for i in range(n):
        write_wav(wav_dir / f"utt{i}.wav", 0.35)
    speakers = tmp_path / "speakers.tsv"
    speakers.write_text(
        "utt_id\tspeaker_id\n"
        + "".join(f"utt{i}\tspk{i}\n" for i in range(n))
    )
    return wav_dir, speakers


def test_missing_flag_exit_1(capsys):
    assert dispatch(["--wav-dir", "x"]) == 1
    assert "usage" in capsys.readouterr().err


def test_empty_wav_dir_exit_2(tmp_path, capsys):
    (tmp_path / "wavs").mkdir()
    rc = dispatch(
        [
            "--wav-dir", str(tmp_path / "wavs"),
            "--speakers", str(tmp_path / "nope.tsv"),
            "--checkpoint", str(tmp_path / "nope.pt"),
            "--out", str(tmp_path / "out"),
        ]
    )
    assert rc == 2
    assert "BadAudio" in capsys.readouterr().err


def test_successful_run(tmp_path, checkpoint, capsys):
    wav_dir, speakers = setup_corpus(tmp_path)
    rc = dispatch(
        [
            "--wav-dir", str(wav_dir),
            "--speakers", str(speakers),
            "--checkpoint", str(checkpoint),
            "--out", str(tmp_path / "out"),
        ]
    )
    assert rc == 0
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert {e["speaker_id"] for e in manifest} == {"spk0", "spk1"}


def test_hop_mismatch_exit_2(tmp_path, slow_checkpoint, capsys):
    wav_dir, speakers = setup_corpus(tmp_path, n=1)
    rc = dispatch(
        [
            "--wav-dir", str(wav_dir),
            "--speakers", str(speakers),
            "--checkpoint", str(slow_checkpoint),
            "--out", str(tmp_path / "out"),
        ]
    )
    assert rc == 2
    assert "FrameRateMismatch" in capsys.readouterr().err
