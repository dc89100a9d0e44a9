"""Trainer CLI: gen-data, train, export (train writes the AEDM in one go)."""

import argparse
import sys

from .export import export_model
from .features import load_manifest, materialize
from .synth import DEFAULT_CLASSES, build_manifest
from .train import TrainConfig, evaluate, train


def cmd_gen_data(args) -> int:
    manifest = build_manifest(
        seed=args.seed,
        clips_per_class=args.clips_per_class,
        classes=DEFAULT_CLASSES,
    )
    materialize(manifest, args.out)
    counts = {s: len(manifest.by_split(s)) for s in ("train", "validation", "test")}
    print(f"wrote {len(manifest.clips)} clips to {args.out}: {counts}")
    return 0


def cmd_train(args) -> int:
    cfg = TrainConfig(epochs=args.epochs, seed=args.seed)
    result = train(args.data, cfg)
    test_acc = evaluate(result, args.data)
    print(
        f"best validation accuracy {result.best_val_accuracy:.3f} "
        f"(epoch {result.best_epoch}); test accuracy {test_acc:.3f}"
    )
    if args.out:
        labels = list(load_manifest(args.data).classes)
        export_model(result.model, labels, args.out)
        print(f"exported {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aedtrain", description="Toy trainer for the aedet runtime.")
    sub = p.add_subparsers(dest="command", required=True)

    pg = sub.add_parser("gen-data", help="generate the synthetic dataset + MELS features")
    pg.add_argument("--out", required=True)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--clips-per-class", type=int, default=50)
    pg.set_defaults(fn=cmd_gen_data)

    pt = sub.add_parser("train", help="train on a generated dataset and export AEDM")
    pt.add_argument("--data", required=True)
    pt.add_argument("--epochs", type=int, default=12)
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("--out", default="", help="AEDM output path")
    pt.set_defaults(fn=cmd_train)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
