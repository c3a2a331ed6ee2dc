"""Command-line entry point: ``rrv {describe,synth,evaluate,train-bow,classify}``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .data.samples import LabeledSample, load_sample, natural_key, save_dataset
from .data.splits import make_splits
from .data.synth import ACTIONS, FAMILIES, NoiseSpec, SynthSpec, add_noise, synth_dataset, synth_skeleton_dataset
from .errors import DataError, InvalidParams, RRVError
from .pipeline import RunConfig, describe_all, evaluate, load_samples, write_bundle
from .recognize.bow import encode_bow, learn_codebook
from .recognize.svm import svm_predict, svm_train
from .serialize import load_bow_model, save_bow_model, save_descriptor_bin, save_descriptor_csv

log = logging.getLogger("rrv")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _shared(p: argparse.ArgumentParser) -> None:
    # defaults are None so that only flags given on the command line override the config file
    g = p.add_argument_group("run options")
    g.add_argument("--config", help="JSON run config (a previous metadata.json also works)")
    g.add_argument("--seed", type=int)
    g.add_argument("--out")
    g.add_argument("--backend", choices=("dtw", "bow"))
    g.add_argument("--metric", choices=("rrv", "l2"))
    g.add_argument("--protocol", choices=("cs", "cs-twofold", "cv-all", "losubo"))
    g.add_argument("--skip-svd-norm", dest="skip_svd_normalization", action="store_const", const=True)
    g.add_argument("--threads", type=int)
    g.add_argument("--data", help="dataset directory or file")
    g.add_argument("--dataset-format", choices=("native", "auslan", "msr", "msrc12"))
    g.add_argument("--format-config", help="JSON column layout for --dataset-format auslan")
    g.add_argument("--skeleton-config", help="JSON joint map / VRB table")
    g.add_argument("--annotations", help="MSRC-12 annotation CSV")
    g.add_argument("--exclude", help="file of sequence names to skip")
    g.add_argument("--train-subjects", type=lambda s: s.split(","), help="comma-separated subject ids for cs")
    g.add_argument("--coords", choices=("lcs", "gcs"))
    g.add_argument("--no-vrb", dest="use_vrb", action="store_const", const=False)
    g.add_argument("--no-smooth", dest="smooth", action="store_const", const=False)
    g.add_argument("--no-trim", dest="trim_stationary", action="store_const", const=False)
    g.add_argument("--no-symmetric", dest="symmetric", action="store_const", const=False)
    g.add_argument("--window", type=int, help="Sakoe-Chiba half width (default: none)")
    g.add_argument("--k-r", type=int)
    g.add_argument("--k-t", type=int)
    g.add_argument("--svm-c", type=float)
    g.add_argument("--svm-gamma", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rrv", description="RRV descriptors and recognition for 6-DOF trajectories and skeletons.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("describe", help="write one descriptor file per sample")
    p.add_argument("input", nargs="?", help="sample JSON, dataset directory, or raw file")
    p.add_argument("--format", choices=("csv", "bin"), default="csv")
    _shared(p)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--kind", choices=("trajectory", "skeleton"), default="trajectory")
    p.add_argument("--classes", help=f"comma-separated families ({','.join(FAMILIES)}) or actions ({','.join(ACTIONS)})")
    p.add_argument("--subjects", type=int, default=5)
    p.add_argument("--per-subject", type=int, default=4)
    p.add_argument("--n-samples", type=int, default=64, help="samples per trajectory / frames per skeleton")
    p.add_argument("--snr", type=lambda s: [float(v) for v in s.split(",")], help="comma-separated SNRs in dB")
    p.add_argument("--no-view-change", dest="view_change", action="store_false")
    _shared(p)

    p = sub.add_parser("evaluate", help="run a split protocol and write a results bundle")
    _shared(p)

    p = sub.add_parser("train-bow", help="learn dictionaries and the SVM, persist the model")
    p.add_argument("--all", dest="train_all", action="store_true", help="train on every sample, not the first split")
    p.add_argument("--model", help="model path (default <out>/model.rrv)")
    _shared(p)

    p = sub.add_parser("classify", help="classify samples with a persisted BoW model")
    p.add_argument("--model", required=True)
    _shared(p)
    return parser


def resolve_config(args) -> RunConfig:
    base: dict = {}
    if args.config:
        raw = json.loads(Path(args.config).read_text())
        base = raw.get("config", raw) if isinstance(raw, dict) else {}
    names = {f.name for f in fields(RunConfig)}
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            base[name] = value
    if getattr(args, "input", None) and args.data is None:
        base["data"] = args.input
    return RunConfig.from_dict(base).validate()


def _write_metadata(out: Path, cfg: RunConfig, command: str, extra: dict | None = None) -> None:
    meta = {"command": command, "config": asdict(cfg), "seeds": {"run": cfg.seed}, **(extra or {})}
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _load_input(cfg: RunConfig) -> list[LabeledSample]:
    path = Path(cfg.data)
    if not path.exists():
        raise DataError(f"{path}: no such file or directory")
    if cfg.dataset_format == "native" and path.is_file():
        return [load_sample(path)]
    return load_samples(cfg)


def cmd_describe(args) -> int:
    cfg = resolve_config(args)
    samples = _load_input(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    descs = describe_all(samples, cfg.descriptor_config(), cfg.threads)
    for i, (s, d) in enumerate(zip(samples, descs)):
        stem = s.name or f"sample{i:05d}"
        if args.format == "csv":
            save_descriptor_csv(out / f"{stem}.csv", d)
        else:
            save_descriptor_bin(out / f"{stem}.bin", d)
    _write_metadata(out, cfg, "describe", {"format": args.format, "n_samples": len(samples)})
    print(f"wrote {len(samples)} descriptors to {out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = resolve_config(args)
    seed = cfg.seed
    out = Path(cfg.out)
    if args.kind == "trajectory":
        classes = args.classes.split(",") if args.classes else ["helix", "figure_eight", "circle"]
        unknown = [c for c in classes if c not in FAMILIES]
        if unknown:
            raise UsageError(f"unknown families {unknown}")
        spec = SynthSpec(n_samples=args.n_samples)
        samples = synth_dataset(classes, args.subjects, args.per_subject, seed, spec, args.view_change)
        gen = {"kind": "trajectory", "spec": asdict(spec)}
    else:
        classes = args.classes.split(",") if args.classes else ["wave_left", "kick_right", "bend"]
        unknown = [c for c in classes if c not in ACTIONS]
        if unknown:
            raise UsageError(f"unknown actions {unknown}")
        samples = synth_skeleton_dataset(
            classes, args.subjects, args.per_subject, seed, n_frames=args.n_samples, view_change=args.view_change
        )
        gen = {"kind": "skeleton"}
    gen.update(classes=classes, subjects=args.subjects, per_subject=args.per_subject, seed=seed,
               view_change=args.view_change)
    save_dataset(samples, out, {"generator": gen})
    for k, snr in enumerate(args.snr or ()):
        noisy = [
            LabeledSample(add_noise(s.payload, NoiseSpec(snr, [seed, k, i])), s.label, s.subject, s.name)
            for i, s in enumerate(samples)
        ]
        save_dataset(noisy, out / f"snr_{snr:g}", {"generator": {**gen, "snr_db": snr, "noise_seed": [seed, k]}})
    print(f"wrote {len(samples)} samples to {out}" + (f" plus {len(args.snr)} noisy copies" if args.snr else ""))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = resolve_config(args)
    samples = load_samples(cfg)
    result = evaluate(samples, cfg)
    out = write_bundle(result, cfg.out, {"command": "evaluate", "seeds": {"run": cfg.seed, "kmeans": cfg.seed}})
    s = result.summary()
    print(
        f"{s['protocol']} {s['backend']}/{s['metric']}: accuracy {100 * s['accuracy_mean']:.2f} "
        f"+- {100 * s['accuracy_std']:.2f} over {s['n_splits']} split(s) -> {out}"
    )
    return EXIT_OK


def cmd_train_bow(args) -> int:
    cfg = resolve_config(args)
    samples = load_samples(cfg)
    if args.train_all:
        train = samples
    else:
        plan = make_splits(samples, cfg.protocol, cfg.train_subjects)[0]
        train = [s for s in samples if s.subject in plan.train]
    descs = describe_all(train, cfg.descriptor_config(), cfg.threads)
    codebook = learn_codebook(descs, cfg.k_r, cfg.k_t, cfg.seed)
    x = np.stack([encode_bow(d, codebook) for d in descs])
    model = svm_train(x, [s.label for s in train], cfg.svm_gamma, cfg.svm_c)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = Path(args.model) if args.model else out / "model.rrv"
    hyper = {"k_r": cfg.k_r, "k_t": cfg.k_t, "seed": cfg.seed, "config": asdict(cfg),
             "train_names": [s.name for s in train]}
    save_bow_model(path, codebook, model, hyper)
    _write_metadata(out, cfg, "train-bow", {"model": str(path), "n_train": len(train)})
    print(f"trained on {len(train)} samples, {len(model.classes)} classes -> {path}")
    return EXIT_OK


def cmd_classify(args) -> int:
    cfg = resolve_config(args)
    codebook, model, _ = load_bow_model(args.model)
    samples = _load_input(cfg)
    descs = describe_all(samples, cfg.descriptor_config(), cfg.threads)
    x = np.stack([encode_bow(d, codebook) for d in descs])
    pred = svm_predict(model, x)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = sorted(zip((s.name for s in samples), (s.label for s in samples), pred), key=lambda r: natural_key(r[0]))
    with open(out / "predictions.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["name", "label", "predicted", "correct"])
        for r in rows:
            w.writerow([*r, int(r[1] == r[2])])
    acc = float(np.mean([r[1] == r[2] for r in rows]))
    (out / "summary.json").write_text(json.dumps({"accuracy": acc, "n": len(rows)}, indent=2) + "\n")
    _write_metadata(out, cfg, "classify", {"model": str(args.model)})
    print(f"accuracy {100 * acc:.2f} on {len(rows)} samples -> {out}")
    return EXIT_OK


COMMANDS = {
    "describe": cmd_describe,
    "synth": cmd_synth,
    "evaluate": cmd_evaluate,
    "train-bow": cmd_train_bow,
    "classify": cmd_classify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, InvalidParams) as exc:
        print(f"rrv {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, json.JSONDecodeError) as exc:
        print(f"rrv {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RRVError as exc:
        print(f"rrv {args.command}: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # invariant violations and bugs
        log.debug("unhandled", exc_info=True)
        print(f"rrv {args.command}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
