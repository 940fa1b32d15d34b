"""Command line for the embedding exporter."""

from __future__ import annotations

import argparse
import logging
import sys

from .export import BridgeConfig, BridgeError, export_embeddings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tgtc-bridge")
    sub = parser.add_subparsers(dest="command", metavar="command")
    p = sub.add_parser("export", help="encode a corpus and write interchange embeddings")
    p.add_argument("--corpus", required=True, help="corpus JSONL file")
    p.add_argument("--model", required=True, help="encoder id or local checkpoint path")
    p.add_argument("--pooling", choices=("cls", "mean"), default="cls",
                   help="sequence-start token or mean over tokens (default cls)")
    p.add_argument("--max-len", type=int, default=512, help="truncation length (default 512)")
    p.add_argument("--batch", type=int, default=32, help="batch size (default 32)")
    p.add_argument("--deterministic", action="store_true",
                   help="single-threaded, seeded execution for byte-identical output")
    p.add_argument("--out", required=True, help="output embedding file")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "export":
        parser.print_usage(sys.stderr)
        return 1
    config = BridgeConfig(
        corpus=args.corpus,
        model=args.model,
        out=args.out,
        pooling=args.pooling,
        max_len=args.max_len,
        batch_size=args.batch,
        deterministic=args.deterministic,
    )
    try:
        path = export_embeddings(config)
    except BridgeError as exc:
        print(f"tgtc-bridge: {exc}", file=sys.stderr)
        return 2
    print(f"wrote embeddings -> {path}")
    return 0


def entry() -> None:
    sys.exit(main())
