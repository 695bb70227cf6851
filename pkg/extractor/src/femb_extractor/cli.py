"""Command-line entry point: extract embeddings from a directory of WAVs."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import BadAudio, ExtractionError
from .extract import ExtractionJob, extract, parse_speakers


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="extract",
        description="Run a frozen TorchScript speech model over WAV files "
        "and write FEMB embedding containers plus a manifest.",
    )
    p.add_argument("--wav-dir", required=True, help="directory of .wav files")
    p.add_argument("--speakers", required=True,
                   help="TSV mapping utt_id to speaker_id")
    p.add_argument("--checkpoint", required=True,
                   help="TorchScript checkpoint path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--frame-ms", type=int, default=20)
    return p


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        wavs = tuple(sorted(Path(args.wav_dir).glob("*.wav")))
        if not wavs:
            raise BadAudio(f"no .wav files in '{args.wav_dir}'")
        job = ExtractionJob(
            wav_paths=wavs,
            speakers=parse_speakers(Path(args.speakers).read_text()),
            checkpoint=Path(args.checkpoint),
            out_dir=Path(args.out),
            frame_ms=args.frame_ms,
        )
        entries = extract(job)
    except ExtractionError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"IOError: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(entries)} embedding files to {args.out}")
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
