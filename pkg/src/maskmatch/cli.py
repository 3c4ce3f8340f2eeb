"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
failure (argparse usage errors also exit 2).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .data import generate_synthetic, load_dataset, load_manifest, parse_synthetic_spec, write_dataset
from .errors import ConfigError, DataError, NumericError
from .harness import (
    TrainRunConfig,
    TrainingAborted,
    compare,
    evaluate,
    load_model,
    parse_config_file,
    save_model,
    sweep_templates,
    train,
    write_results_csv,
    write_results_json,
)


def _load_data(path):
    return load_dataset(load_manifest(path))


def _base_config(args) -> TrainRunConfig:
    config = parse_config_file(args.config) if args.config else TrainRunConfig()
    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    return config


def _emit_results(records, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_results_csv(records, out_dir / "results.csv")
    write_results_json(records, out_dir / "results.json")
    print(f"results written to {out_dir / 'results.csv'} and results.json")


def cmd_train(args) -> int:
    config = _base_config(args)
    dataset = _load_data(args.data)
    out_dir = Path(args.out) if args.out else None
    try:
        model, report = train(config, dataset)
    except TrainingAborted as aborted:
        print(f"numeric failure: {aborted}", file=sys.stderr)
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            ckpt, _ = save_model(aborted.model, out_dir / "aborted")
            print(f"last-good checkpoint written to {ckpt}", file=sys.stderr)
        return 4
    for split, value in report.values.items():
        print(f"{split} {report.metric_name}: {value:.4f}")
    print(f"best epoch: {report.best_epoch}   optimizer steps: {report.optimizer_steps}"
          f"   wall: {report.wall_seconds:.1f}s")
    if out_dir is not None:
        ckpt_path, vocab_path = save_model(model, out_dir)
        from .harness import _run_record

        _emit_results([_run_record(config, str(args.data), report)], out_dir)
        print(f"checkpoint: {ckpt_path}\nvocab: {vocab_path}")
    return 0


def cmd_eval(args) -> int:
    dataset = _load_data(args.data)
    model = load_model(args.checkpoint, dataset.manifest)
    report, predictions = evaluate(model, dataset, split=args.split)
    value = report.values[args.split]
    print(f"{args.split} {report.metric_name}: {value:.4f}")
    if args.predictions:
        labels = dataset.manifest.labels
        with open(args.predictions, "w", encoding="utf-8", newline="\n") as fh:
            for pred in predictions:
                fh.write(labels[pred] + "\n")
        print(f"predictions written to {args.predictions}")
    return 0


def _parse_seeds(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in raw.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad seed list {raw!r}; expected e.g. 1,2,3") from exc


def cmd_compare(args) -> int:
    config = _base_config(args)
    dataset = _load_data(args.data)
    seeds = _parse_seeds(args.seeds)
    table = compare(config, dataset, paradigms=tuple(args.paradigms.split(",")),
                    seeds=seeds, dataset_name=str(args.data))
    print(table.to_text())
    if args.out:
        _emit_results(table.records, Path(args.out))
    return 0


def cmd_sweep_templates(args) -> int:
    config = _base_config(args)
    dataset = _load_data(args.data)
    seeds = _parse_seeds(args.seeds)
    report = sweep_templates(config, dataset, templates=tuple(args.templates.split(",")),
                             seeds=seeds, dataset_name=str(args.data))
    print(report.to_text())
    if args.out:
        _emit_results(report.records, Path(args.out))
    return 0


def cmd_gen_synthetic(args) -> int:
    spec = parse_synthetic_spec(args.spec)
    dataset = generate_synthetic(spec)
    manifest_path = write_dataset(dataset, args.out)
    sizes = {name: len(split) for name, split in dataset.splits.items()}
    print(f"manifest: {manifest_path}")
    print(f"classes: {dataset.manifest.n_classes}   splits: {sizes}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maskmatch",
        description="Train and evaluate prompt-based classifiers that match "
                    "input and label mask representations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train one model")
    p_train.add_argument("--config", help="key=value run config file")
    p_train.add_argument("--data", required=True, help="dataset manifest")
    p_train.add_argument("--seed", type=int, help="override the config seed")
    p_train.add_argument("--out", help="directory for checkpoint and results")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--data", required=True, help="dataset manifest")
    p_eval.add_argument("--split", choices=("dev", "test"), default="dev")
    p_eval.add_argument("--predictions", help="write predicted label names here")
    p_eval.set_defaults(func=cmd_eval)

    p_cmp = sub.add_parser("compare", help="compare paradigms over seeds")
    p_cmp.add_argument("--paradigms", default="ft,pt,sm,mm")
    p_cmp.add_argument("--seeds", default="0,1,2")
    p_cmp.add_argument("--config", help="base run config file")
    p_cmp.add_argument("--data", required=True)
    p_cmp.add_argument("--out", help="directory for results CSV/JSON")
    p_cmp.set_defaults(func=cmd_compare)

    p_sweep = sub.add_parser("sweep-templates", help="sweep label templates P1-P4")
    p_sweep.add_argument("--templates", default="P1,P2,P3,P4")
    p_sweep.add_argument("--seeds", default="0,1,2")
    p_sweep.add_argument("--config", help="base run config file")
    p_sweep.add_argument("--data", required=True)
    p_sweep.add_argument("--out", help="directory for results CSV/JSON")
    p_sweep.set_defaults(func=cmd_sweep_templates)

    p_gen = sub.add_parser("gen-synthetic", help="generate a synthetic dataset")
    p_gen.add_argument("--spec", required=True, help="key=value synthetic spec file")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.set_defaults(func=cmd_gen_synthetic)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
