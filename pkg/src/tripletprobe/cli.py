"""Command-line front door.

Subcommands wire the modules into batch workflows; every successful run
writes a run manifest (config snapshot, input digests, seed, outputs) next
to its primary output. Configuration precedence: flags > --config JSON >
defaults. Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import annotations as ann_mod
from . import baseline as baseline_mod
from . import decoder as decoder_mod
from . import embedio
from . import framing
from . import metrics as metrics_mod
from . import probe as probe_mod
from . import synthgen
from .errors import ToolkitError


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(command, args_ns, inputs, outputs, seed=None):
    manifest = {
        "command": command,
        "config": {
            k: v for k, v in vars(args_ns).items() if k not in ("func", "config")
        },
        "input_digests": {str(p): _digest(Path(p)) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "seed": seed,
    }
    primary = Path(outputs[0])
    path = primary.with_name(primary.name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, default=str) + "\n")


def _load_config_defaults(argv):
    """Pull --config JSON values in as defaults (flags still win)."""
    if "--config" not in argv:
        return {}
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config requires a path")
    return json.loads(Path(argv[i + 1]).read_text())


def _load_files_from_manifest(manifest_path):
    entries = embedio.read_manifest(manifest_path)
    files = []
    speakers = {}
    for e in entries:
        emb = embedio.read_embeddings(Path(e["file"]).read_bytes())
        files.append(emb)
        speakers[e["utt_id"]] = e["speaker_id"]
    return files, speakers


def _read_targets(value):
    p = Path(value)
    if p.exists():
        return {s for s in p.read_text().split() if s}
    return {s for s in value.split(",") if s}


# --- subcommand handlers -------------------------------------------------

def cmd_synth(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = synthgen.SynthConfig(
        n_phonemes=args.n_phonemes,
        dim=args.dim,
        n_speakers=args.n_speakers,
        utterances_per_speaker=args.utts_per_speaker,
        noise_sigma=args.noise_sigma,
        speaker_shift_sigma=args.speaker_shift_sigma,
        seed=args.seed,
    )
    annotations, embeddings = synthgen.generate(cfg)
    seg_path = out / "segments.tsv"
    seg_path.write_text(ann_mod.write_segmentation(annotations))
    entries = []
    spk = {a.utt_id: a.speaker_id for a in annotations}
    for emb in embeddings:
        fname = f"{emb.utt_id}.femb"
        (out / fname).write_bytes(embedio.write_embeddings(emb))
        entries.append({"file": fname, "utt_id": emb.utt_id, "speaker_id": spk[emb.utt_id]})
    manifest_path = out / "manifest.json"
    embedio.write_manifest(manifest_path, entries)
    _write_manifest("synth", args, [], [seg_path, manifest_path], seed=args.seed)
    return 0


def cmd_label(args):
    annotations = ann_mod.parse_segmentation(Path(args.segments).read_text())
    frames = []
    for a in annotations:
        frames.extend(framing.label_utterance_frames(a, args.frame_ms))
    if args.targets:
        frames = framing.filter_frames(
            frames, _read_targets(args.targets), not args.keep_two_border
        )
    elif not args.keep_two_border:
        frames = [f for f in frames if f.kind is not framing.FrameKind.TWO_BORDER]
    Path(args.out).write_text(framing.frames_to_tsv(frames))
    _write_manifest("label", args, [args.segments], [args.out])
    return 0


def cmd_dataset(args):
    annotations = ann_mod.parse_segmentation(Path(args.segments).read_text())
    files, speakers = _load_files_from_manifest(args.manifest)
    inventory = ann_mod.build_inventory(annotations, args.min_count)
    frames = []
    for a in annotations:
        frames.extend(framing.label_utterance_frames(a, args.frame_ms))
    targets = (
        _read_targets(args.targets) if args.targets else set(inventory.symbols)
    )
    frames = framing.filter_frames(frames, targets, not args.keep_two_border)
    dataset = embedio.assemble_dataset(files, frames, inventory)
    Path(args.out).write_bytes(embedio.write_dataset(dataset))
    _write_manifest("dataset", args, [args.segments, args.manifest], [args.out])
    return 0


def _maybe_speaker_subset(dataset, speakers_arg):
    if not speakers_arg:
        return dataset
    wanted = {s for s in speakers_arg.split(",") if s}
    train, _test = embedio.speaker_split(dataset, wanted)
    return train


def cmd_train(args):
    dataset = embedio.read_dataset(Path(args.dataset).read_bytes())
    dataset = _maybe_speaker_subset(dataset, args.speakers)
    cfg = probe_mod.TrainConfig(
        learning_rate=args.learning_rate,
        weight_decay=args.weight_decay,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
        precision=args.precision,
    )
    probe_cfg = probe_mod.ProbeConfig(
        input_dim=dataset.features.shape[1],
        n_classes=len(dataset.inventory),
        hidden_dims=tuple(args.hidden_dims),
        dropout=args.dropout,
    )
    model, history = probe_mod.train(dataset, cfg, probe_cfg)
    Path(args.out).write_bytes(probe_mod.save_model(model))
    hist_path = Path(args.out).with_suffix(".loss.json")
    hist_path.write_text(json.dumps(history) + "\n")
    _write_manifest("train", args, [args.dataset], [args.out, hist_path], seed=args.seed)
    return 0


def _dataset_triplets(dataset):
    symbols = dataset.inventory.symbols
    return [
        framing.TripletLabel(*(symbols[j] for j in row)) for row in dataset.labels
    ]


def cmd_eval(args):
    model = probe_mod.load_model(Path(args.model).read_bytes())
    dataset = embedio.read_dataset(Path(args.dataset).read_bytes())
    dataset = _maybe_speaker_subset(dataset, args.speakers)
    _, argmax = probe_mod.predict(model, dataset.features)
    symbols = model.inventory.symbols
    preds = [framing.TripletLabel(*(symbols[j] for j in row)) for row in argmax]
    truths = _dataset_triplets(dataset)
    rep = metrics_mod.report(preds, truths)
    Path(args.out).write_text(rep.to_json() + "\n")
    _write_manifest("eval", args, [args.model, args.dataset], [args.out])
    return 0


def cmd_confusion(args):
    model = probe_mod.load_model(Path(args.model).read_bytes())
    dataset = embedio.read_dataset(Path(args.dataset).read_bytes())
    _, argmax = probe_mod.predict(model, dataset.features)
    symbols = model.inventory.symbols
    preds = [framing.TripletLabel(*(symbols[j] for j in row)) for row in argmax]
    truths = _dataset_triplets(dataset)
    cm = metrics_mod.confusion(preds, truths, args.position, dataset.inventory)
    Path(args.out).write_text(metrics_mod.confusion_to_csv(cm))
    _write_manifest("confusion", args, [args.model, args.dataset], [args.out])
    return 0


def cmd_baseline(args):
    triplets = framing.triplets_from_tsv(Path(args.labels).read_text())
    cfg = baseline_mod.BaselineConfig(
        p_identify=args.p,
        protocol=baseline_mod.Protocol(args.protocol),
        trials=args.trials,
        seed=args.seed,
    )
    expected = baseline_mod.expected_ordered_baseline(triplets, cfg)
    simulated, stderr = baseline_mod.simulate_ordered_baseline(triplets, cfg)
    result = {
        "protocol": cfg.protocol.value,
        "p": cfg.p_identify,
        "expected": expected,
        "simulated": simulated,
        "stderr": stderr,
        "trials": cfg.trials,
    }
    out_text = json.dumps(result, indent=2) + "\n"
    print(out_text, end="")
    if args.out:
        Path(args.out).write_text(out_text)
        _write_manifest("baseline", args, [args.labels], [args.out], seed=args.seed)
    return 0


def cmd_decode(args):
    model = probe_mod.load_model(Path(args.model).read_bytes())
    emb = embedio.read_embeddings(Path(args.embedding).read_bytes())
    decodes = decoder_mod.decode_frames(model, emb)
    targets = _read_targets(args.targets) if args.targets else None
    Path(args.out_track).write_text(decoder_mod.export_track(decodes, targets))
    events = decoder_mod.locate_boundaries(decodes, emb.frame_ms)
    Path(args.out_boundaries).write_text(decoder_mod.boundaries_to_json(events) + "\n")
    inputs = [args.model, args.embedding]
    if args.reference:
        annotations = ann_mod.parse_segmentation(Path(args.reference).read_text())
        ref = next(a for a in annotations if a.utt_id == emb.utt_id)
        acc = decoder_mod.sequence_ordered_accuracy(decodes, ref, emb.frame_ms)
        print(json.dumps({"ordered_accuracy": acc}))
        inputs.append(args.reference)
    _write_manifest("decode", args, inputs, [args.out_track, args.out_boundaries])
    return 0


# --- parser --------------------------------------------------------------

def build_parser(defaults: dict) -> _Parser:
    parser = _Parser(prog="tripletprobe")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def d(key, fallback):
        return defaults.get(key, fallback)

    p = sub.add_parser("synth", parents=[], help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n-phonemes", type=int, default=d("n_phonemes", 20))
    p.add_argument("--dim", type=int, default=d("dim", 32))
    p.add_argument("--n-speakers", type=int, default=d("n_speakers", 8))
    p.add_argument("--utts-per-speaker", type=int, default=d("utts_per_speaker", 10))
    p.add_argument("--noise-sigma", type=float, default=d("noise_sigma", 0.05))
    p.add_argument("--speaker-shift-sigma", type=float,
                   default=d("speaker_shift_sigma", 0.0))
    p.add_argument("--seed", type=int, default=d("seed", 0))
    p.add_argument("--config")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("label", help="frame-label an annotation file")
    p.add_argument("--segments", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--frame-ms", type=int, default=d("frame_ms", 20))
    p.add_argument("--targets", default=d("targets", None))
    p.add_argument("--keep-two-border", action="store_true")
    p.add_argument("--config")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("dataset", help="pack labels + embeddings into a dataset")
    p.add_argument("--segments", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--frame-ms", type=int, default=d("frame_ms", 20))
    p.add_argument("--min-count", type=int, default=d("min_count", 50))
    p.add_argument("--targets", default=d("targets", None))
    p.add_argument("--keep-two-border", action="store_true")
    p.add_argument("--config")
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("train", help="train a probe on a packed dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--speakers", default=d("speakers", None),
                   help="comma-separated speakers to train on")
    p.add_argument("--hidden-dims", type=int, nargs=3,
                   default=d("hidden_dims", [512, 512, 512]))
    p.add_argument("--dropout", type=float, default=d("dropout", 0.1))
    p.add_argument("--learning-rate", type=float, default=d("learning_rate", 1e-3))
    p.add_argument("--weight-decay", type=float, default=d("weight_decay", 1e-2))
    p.add_argument("--batch-size", type=int, default=d("batch_size", 256))
    p.add_argument("--epochs", type=int, default=d("epochs", 20))
    p.add_argument("--seed", type=int, default=d("seed", 0))
    p.add_argument("--precision", choices=("single", "double"),
                   default=d("precision", "single"))
    p.add_argument("--config")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a model on a packed dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--speakers", default=d("speakers", None))
    p.add_argument("--config")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("confusion", help="per-position confusion matrix CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--position", choices=metrics_mod.POSITIONS, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_confusion)

    p = sub.add_parser("baseline", help="random-order chance baseline")
    p.add_argument("--labels", required=True, help="frame label TSV")
    p.add_argument("--p", type=float, default=d("p", 0.9))
    p.add_argument("--protocol", choices=[pr.value for pr in baseline_mod.Protocol],
                   default=d("protocol", "per_position"))
    p.add_argument("--trials", type=int, default=d("trials", 10000))
    p.add_argument("--seed", type=int, default=d("seed", 0))
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("decode", help="decode a continuous recording")
    p.add_argument("--model", required=True)
    p.add_argument("--embedding", required=True)
    p.add_argument("--reference", help="segmentation TSV for scoring")
    p.add_argument("--out-track", required=True)
    p.add_argument("--out-boundaries", required=True)
    p.add_argument("--targets", default=d("targets", None))
    p.add_argument("--config")
    p.set_defaults(func=cmd_decode)

    return parser


def dispatch(argv: list[str]) -> int:
    try:
        defaults = _load_config_defaults(argv)
        parser = build_parser(defaults)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except ToolkitError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
