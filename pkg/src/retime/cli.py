"""Command-line front door.

Subcommands cover resampling frame directories, generating rate-modified
datasets, inspecting schedule distributions, the synthetic training rig,
and input-alpha sweeps.  Every command prints its resolved configuration
as a first `# config:` line so any run can be reproduced exactly.

Exit codes: 0 success, 2 invalid arguments, 3 I/O failure, 4 numerical
failure.

`retime --serve-plans` switches to a JSON-lines service on stdin/stdout:
  {"n": 10, "l": 5, "alpha": 2.0}        -> {"indices": [2, 4, 6, 8, 10]}
  {"schedule": "rr:seed=1", "count": 3}  -> {"alphas": [...]}
Malformed or invalid requests get {"error": "..."} and the service keeps
reading.  Lines starting with '#' on stdout are configuration banners and
may be skipped by clients.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import evaluate, pipeline, schedules, seqio, toy
from .dataset import generate_rate_dataset
from .resample import compute_index_plan, resample_by_rate_indexed, resample_by_rate_interpolated
from .toy import TrainConfig, TrainingDivergedError


def _print_config(command: str, args: argparse.Namespace) -> None:
    resolved = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("command", "serve_plans")
    }
    print(f"# config: {json.dumps({'command': command, **resolved}, sort_keys=True)}")


def cmd_resample(args: argparse.Namespace) -> int:
    _print_config("resample", args)
    seq = seqio.load_sequence(args.in_path)
    if args.mode == "indexed":
        out_seq = resample_by_rate_indexed(seq, args.alpha)
    else:
        out_seq = resample_by_rate_interpolated(seq, args.alpha)
    out_dir = seqio.write_frame_dir(out_seq, args.out)
    (out_dir / "provenance.json").write_text(
        json.dumps({"parent": seq.id, "alpha": args.alpha, "mode": args.mode}, sort_keys=True)
        + "\n"
    )
    print(f"wrote {len(out_seq)} frames to {out_dir}")
    return 0


def cmd_gen_rate_dataset(args: argparse.Namespace) -> int:
    _print_config("gen-rate-dataset", args)
    manifest = seqio.read_manifest(args.manifest)
    combined = generate_rate_dataset(manifest, args.seed, args.out, grid=args.grid)
    out_path = seqio.write_manifest(combined, Path(args.out) / f"{combined.name}.manifest.tsv")
    print(f"wrote {len(combined.entries)} entries to {out_path}")
    return 0


def cmd_schedule_sample(args: argparse.Namespace) -> int:
    _print_config("schedule-sample", args)
    state = schedules.parse_schedule(args.schedule)
    counts = schedules.alpha_histogram(state, args.draws, args.bins)
    edges = np.linspace(state.lo, state.hi, args.bins + 1)
    lines = ["bin,lo,hi,count"]
    lines += [
        f"{i + 1},{edges[i]:.6g},{edges[i + 1]:.6g},{counts[i]}" for i in range(args.bins)
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote histogram to {args.out}")
    else:
        print(text, end="")
    if args.draws_out:
        values = schedules.draw_block(state, args.draws)
        Path(args.draws_out).write_text("".join(f"{float(v)!r}\n" for v in values))
        print(f"wrote {args.draws} draws to {args.draws_out}")
    return 0


def _synthetic_spec(args: argparse.Namespace) -> toy.SyntheticSpec:
    return toy.SyntheticSpec(
        num_classes=args.classes,
        frames_per_sample=args.frames,
        frame_dim=args.dim,
        samples_per_class=args.per_class,
        rate_lo=args.rate_lo,
        rate_hi=args.rate_hi,
        noise_sigma=args.noise,
        seed=args.seed,
    )


def _sidecar_spec(meta: dict, seed: int) -> toy.SyntheticSpec:
    keys = ("num_classes", "frames_per_sample", "frame_dim", "samples_per_class",
            "rate_lo", "rate_hi", "noise_sigma", "seed")
    stored = meta.get("synthetic_spec")
    if stored is None:
        raise ValueError("model sidecar lacks synthetic_spec; pass the training flags instead")
    return toy.SyntheticSpec(**{k: stored[k] for k in keys})


def _spec_dict(spec: toy.SyntheticSpec) -> dict:
    return {
        "num_classes": spec.num_classes,
        "frames_per_sample": spec.frames_per_sample,
        "frame_dim": spec.frame_dim,
        "samples_per_class": spec.samples_per_class,
        "rate_lo": spec.rate_lo,
        "rate_hi": spec.rate_hi,
        "noise_sigma": spec.noise_sigma,
        "seed": spec.seed,
    }


def _load_classifier(path: str) -> tuple[toy.ToyClassifier, dict]:
    weights, bias, input_len, meta = seqio.load_model_file(path)
    clf = toy.ToyClassifier(weights, bias, input_len,
                            trained_config=meta.get("trained_config", ""))
    return clf, meta


def _sweep_and_emit(
    clf: toy.ToyClassifier,
    test_samples: list[toy.LabeledSequence],
    spec: pipeline.PipelineSpec,
    out_dir: Path,
    stem: str,
    model_tag: str,
    dataset_tag: str,
    checkpoint_tag: str = "",
) -> evaluate.AlphaSweepReport:
    schedule_for_test = None
    if clf.trained_config:
        schedule_for_test = schedules.parse_schedule(clf.trained_config)
    report = evaluate.input_alpha_test(
        clf, test_samples, spec, schedule_for_test,
        model_tag=model_tag, dataset_tag=dataset_tag,
    )
    if checkpoint_tag:
        report.checkpoint_tag = checkpoint_tag
    evaluate.emit_report(report, out_dir / f"{stem}.csv", "csv")
    evaluate.emit_report(report, out_dir / f"{stem}.json", "json")
    print(f"{stem}: acc_uniform={report.acc_uniform:.2f} std={report.std:.4f} "
          f"type={evaluate.classify_temporal_type(report)}")
    return report


def cmd_toy(args: argparse.Namespace) -> int:
    _print_config("toy", args)
    spec = _synthetic_spec(args)
    pl = pipeline.preset("toy")
    out = Path(args.out)

    if args.train:
        data = toy.generate_synthetic(spec)
        schedule = schedules.parse_schedule(args.schedule)
        config = TrainConfig(epochs=args.epochs, lr=args.lr, batch_size=args.batch,
                             seed=args.seed)
        model = toy.train_toy(data.train, pl, schedule, config)
        seqio.save_model_file(
            out, model.weights, model.bias, model.input_len,
            trained_config=model.trained_config,
            extra={"synthetic_spec": _spec_dict(spec), "final_loss": model.loss_history[-1]},
        )
        print(f"trained {args.schedule} for {args.epochs} epochs, "
              f"final loss {model.loss_history[-1]:.4f}, saved to {out}")
        return 0

    if args.sweep:
        clf, meta = _load_classifier(args.model)
        data_spec = _sidecar_spec(meta, args.seed) if meta.get("synthetic_spec") else spec
        data = toy.generate_synthetic(data_spec)
        out.mkdir(parents=True, exist_ok=True)
        tag = args.tag or clf.trained_config or "model"
        report = _sweep_and_emit(clf, data.test, pl, out, "sweep", tag, "synthetic")
        evaluate.emit_plot([report], out / "sweep.svg")
        return 0

    # checkpoint sweep: train once, evaluate saved epochs
    epochs_list = tuple(int(e) for e in args.checkpoint_epochs.split(","))
    data = toy.generate_synthetic(spec)
    schedule = schedules.parse_schedule(args.schedule)
    config = TrainConfig(epochs=max(args.epochs, max(epochs_list)), lr=args.lr,
                         batch_size=args.batch, seed=args.seed)
    saved: dict[int, toy.ToyClassifier] = {}
    toy.train_toy(data.train, pl, schedule, config,
                  checkpoint_epochs=epochs_list, checkpoints_out=saved)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for epoch in epochs_list:
        reports.append(
            _sweep_and_emit(saved[epoch], data.test, pl, out, f"epoch{epoch:03d}",
                            args.schedule, "synthetic", checkpoint_tag=f"epoch {epoch}")
        )
    evaluate.emit_plot(reports, out / "checkpoints.svg")
    return 0


def cmd_alpha_test(args: argparse.Namespace) -> int:
    _print_config("alpha-test", args)
    clf, _ = _load_classifier(args.model)
    manifest = seqio.read_manifest(args.manifest)
    test_entries = [e for e in manifest.entries if e.split == "test"]
    if not test_entries:
        raise ValueError(f"manifest {args.manifest} has no test-split entries")
    labels = sorted({e.label for e in manifest.entries})
    label_index = {lab: i for i, lab in enumerate(labels)}
    samples = [
        toy.LabeledSequence(seqio.load_sequence(e.path, seq_id=e.video_id),
                            label_index[e.label], "test")
        for e in test_entries
    ]
    spec = pipeline.preset(args.preset)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = _sweep_and_emit(clf, samples, spec, out, "alpha_test",
                             args.tag or Path(args.model).stem, manifest.name)
    evaluate.emit_plot([report], out / "alpha_test.svg")
    return 0


def cmd_preset(args: argparse.Namespace) -> int:
    _print_config("preset", args)
    text = pipeline.format_pipeline_config(pipeline.preset(args.name))
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote preset to {args.out}")
    else:
        print(text, end="")
    return 0


def serve_plans(stdin=None, stdout=None) -> int:
    """JSON-lines plan service; one response line per request line."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    print("# config: " + json.dumps({"command": "serve-plans"}), file=stdout, flush=True)
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
            if "schedule" in req:
                state = schedules.parse_schedule(req["schedule"])
                count = int(req["count"])
                if count < 0:
                    raise ValueError(f"count must be non-negative, got {count}")
                resp = {"alphas": [float(v) for v in schedules.draw_block(state, count)]}
            else:
                plan = compute_index_plan(int(req["n"]), int(req["l"]), float(req["alpha"]))
                resp = {"indices": [int(i) for i in plan.indices]}
        except Exception as exc:
            resp = {"error": str(exc)}
        print(json.dumps(resp), file=stdout, flush=True)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retime",
        description="Temporal resampling, schedules, and rate-robustness evaluation.",
    )
    parser.add_argument("--serve-plans", action="store_true",
                        help="run the JSON-lines plan service on stdin/stdout")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("resample", help="resample a frame directory or raw container")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--mode", choices=("indexed", "interp"), default="indexed")
    p.add_argument("--out", required=True)

    p = sub.add_parser("gen-rate-dataset", help="write ten speed variants per video")
    p.add_argument("--manifest", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--grid", action="store_true", help="fixed rate grid instead of draws")

    p = sub.add_parser("schedule-sample", help="histogram a schedule's alpha stream")
    p.add_argument("--schedule", required=True)
    p.add_argument("--draws", type=int, required=True)
    p.add_argument("--bins", type=int, default=14)
    p.add_argument("--out", default="")
    p.add_argument("--draws-out", dest="draws_out", default="",
                   help="also write the raw draws, one per line")

    p = sub.add_parser("toy", help="synthetic training rig")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--train", action="store_true")
    mode.add_argument("--sweep", action="store_true")
    mode.add_argument("--checkpoint-sweep", dest="checkpoint_sweep", action="store_true")
    p.add_argument("--schedule", default="cvr:1.0")
    p.add_argument("--model", default="", help="model file (for --sweep)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="model file (--train) or report dir")
    p.add_argument("--tag", default="")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--classes", type=int, default=6)
    p.add_argument("--frames", type=int, default=40)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--per-class", dest="per_class", type=int, default=200)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--rate-lo", dest="rate_lo", type=float, default=0.7)
    p.add_argument("--rate-hi", dest="rate_hi", type=float, default=1.3)
    p.add_argument("--checkpoint-epochs", dest="checkpoint_epochs", default="2,5,10,20,30")

    p = sub.add_parser("alpha-test", help="15-point input-alpha sweep over a manifest")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--preset", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--tag", default="")

    p = sub.add_parser("preset", help="print a preprocessing preset as a config file")
    p.add_argument("--name", required=True)
    p.add_argument("--out", default="")

    return parser


_DISPATCH = {
    "resample": cmd_resample,
    "gen-rate-dataset": cmd_gen_rate_dataset,
    "schedule-sample": cmd_schedule_sample,
    "toy": cmd_toy,
    "alpha-test": cmd_alpha_test,
    "preset": cmd_preset,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.serve_plans:
            return serve_plans()
        if args.command is None:
            parser.print_help(file=sys.stderr)
            return 2
        if getattr(args, "sweep", False) and not args.model:
            raise ValueError("toy --sweep needs --model")
        return _DISPATCH[args.command](args)
    except (TrainingDivergedError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
