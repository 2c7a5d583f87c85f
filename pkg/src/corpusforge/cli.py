"""Command-line interface.

Subcommands: annotate, dedup, filter, stats, train, calibrate. Exit
codes: 0 success, 1 configuration error, 2 data error. Every option can
also come from a JSON config file (--config) or a CORPUSFORGE_* env
variable; command-line flags win.
"""

from __future__ import annotations

import argparse
import sys

from . import pipeline
from .errors import ConfigError, DataError, RecordError


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--input", dest="input_root", help="corpus root directory")
    parser.add_argument("--output", dest="output_root", help="output root directory")
    parser.add_argument(
        "--snapshots",
        help="comma-separated snapshot ids, newest first (e.g. 2023-14,2022-49)",
    )
    parser.add_argument("--languages", help="comma-separated language codes")
    parser.add_argument("--workers", type=int, help="parallel shard workers")
    parser.add_argument("--seed", type=int, help="random seed for training")
    parser.add_argument(
        "--force", action="store_true", default=None,
        help="recompute shards whose outputs already exist",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corpusforge",
        description="Web-corpus quality annotation, deduplication, and filtering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annotate", help="compute quality-signal sidecars")
    _add_common(p)
    p.add_argument(
        "--signals",
        help="comma-separated signal names or groups "
        "(ccnet, natlang, repetition, content, lines, ml)",
    )

    p = sub.add_parser("dedup", help="build duplicate sidecars")
    _add_common(p)
    p.add_argument("--mode", choices=("exact", "fuzzy"), default="exact")
    p.add_argument(
        "--jaccard", type=float,
        help="target Jaccard similarity level for fuzzy mode (picks the banding)",
    )
    p.add_argument("--bloom-capacity", type=int, dest="bloom_capacity")
    p.add_argument("--bloom-error-rate", type=float, dest="bloom_error_rate")

    p = sub.add_parser("filter", help="apply a ruleset and drop duplicates")
    _add_common(p)
    p.add_argument(
        "--preset", dest="ruleset",
        help="preset name ('+'-composable) or path to a rule JSON",
    )
    p.add_argument(
        "--no-dedup", action="store_true",
        help="ignore duplicate sidecars while filtering",
    )

    p = sub.add_parser("stats", help="per-language document/word count table")
    _add_common(p)
    p.add_argument("--json", action="store_true",
                   help="emit one machine-readable JSON object instead of a table")

    p = sub.add_parser("train", help="train a model used for annotation")
    _add_common(p)
    p.add_argument(
        "kind", choices=("classifier", "hashed_lm", "kn_lm", "calibrate_buckets")
    )
    p.add_argument("--positive", help="JSONL(.gz) of positive examples")
    p.add_argument("--negative", help="JSONL(.gz) of negative examples")
    p.add_argument("--corpus", help="JSONL(.gz) training corpus")
    p.add_argument("--kn-model", dest="kn_model", help="trained 5-gram model path")
    p.add_argument("--model-output", dest="model_output", required=True,
                   help="where to write the model JSON")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--buckets", type=int, default=10_000)
    p.add_argument("--order", type=int, default=5)

    p = sub.add_parser(
        "calibrate", help="alias for 'train calibrate_buckets'"
    )
    _add_common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--kn-model", dest="kn_model", required=True)
    p.add_argument("--model-output", dest="model_output", required=True)

    return parser


def _config_from_args(args: argparse.Namespace) -> pipeline.PipelineConfig:
    overrides = {}
    for key in ("input_root", "output_root", "workers", "seed", "jaccard",
                "bloom_capacity", "bloom_error_rate", "ruleset"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    for key in ("snapshots", "languages"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = [x for x in value.split(",") if x]
    if getattr(args, "signals", None) is not None:
        overrides["signals"] = [x for x in args.signals.split(",") if x]
    if getattr(args, "force", None):
        overrides["force"] = True
    if getattr(args, "no_dedup", False):
        overrides["apply_dedup"] = False
    return pipeline.PipelineConfig.load(args.config, overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "annotate":
            pipeline.cmd_annotate(cfg)
        elif args.command == "dedup":
            pipeline.cmd_dedup(cfg, args.mode)
        elif args.command == "filter":
            pipeline.cmd_filter(cfg)
        elif args.command == "stats":
            pipeline.cmd_stats(cfg, as_json=args.json)
        elif args.command == "train":
            pipeline.cmd_train(cfg, args.kind, {
                "positive": args.positive,
                "negative": args.negative,
                "corpus": args.corpus,
                "kn_model": args.kn_model,
                "output": args.model_output,
                "epochs": args.epochs,
                "lr": args.lr,
                "buckets": args.buckets,
                "order": args.order,
            })
        elif args.command == "calibrate":
            pipeline.cmd_train(cfg, "calibrate_buckets", {
                "corpus": args.corpus,
                "kn_model": args.kn_model,
                "output": args.model_output,
            })
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, RecordError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
